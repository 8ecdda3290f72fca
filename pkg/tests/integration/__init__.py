# Integration tests for comclip
