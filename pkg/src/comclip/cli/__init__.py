"""Command-line interface for comclip."""
