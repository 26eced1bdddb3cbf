"""
llbc-translate: interpreter, borrow checker and functional translator for LLBC.

Package structure:
  src/
    common/         - Shared utilities (logging, config, diagnostics)
    llbc/           - The LLBC pipeline and command-line entry point
"""
