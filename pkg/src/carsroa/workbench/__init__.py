"""Configuration, runs and command-line entry point."""
