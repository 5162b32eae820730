"""Plan validation and the oracle suite behind `validate`."""
