# Unit tests for comclip
