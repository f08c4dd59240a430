"""Report writers and run configuration files."""
