"""LLBC toolchain: concrete and symbolic interpreters, borrow checker and
translation to a pure functional language.

Pipeline stages live in sub-packages:
  core/        - AST, parser, validation, terminalization, dependency ordering
  store/       - values, environments and place operations
  concrete/    - concrete interpreter with lazy reorganization
  symbolic/    - symbolic interpreter and borrow checker
  synthesis/   - forward/backward function synthesis
  pure/        - pure language: evaluator, printers, reader
"""
