"""Report building for experiment runs."""
