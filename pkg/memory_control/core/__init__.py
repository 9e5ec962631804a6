"""Core components: configuration, validation, the experiment catalog and the runner."""
