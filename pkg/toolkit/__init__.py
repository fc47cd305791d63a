"""Command-line shell: config files, subcommand dispatch and result files."""
