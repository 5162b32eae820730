"""Closed-form power analysis and Cramer-Rao bounds."""
