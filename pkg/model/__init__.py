"""Signal model: array geometry, echo channel and IRS reflection schedules."""
