"""Translation of borrow-checked LLBC into the pure language.

Submodules are imported directly (`src.llbc.synthesis.translate`); the symbolic
interpreter depends on `erase`, so this package keeps no eager imports.
"""
