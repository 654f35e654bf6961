"""Built-in benchmark domains."""
