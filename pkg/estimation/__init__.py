"""Direction-of-arrival estimators and metrics."""
