"""comclip test suite."""
