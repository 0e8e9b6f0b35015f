"""Helpers shared by the engine modules: configuration, validation and file output."""
