"""LLBC syntax, concrete-syntax frontend, validation and pre-passes."""

from .json_codec import program_from_json, program_to_json
from .ordering import DeclGroup, function_groups, type_groups
from .parser import parse_file, parse_program
from .printer import pretty_llbc, print_place, print_ty
from .terminalize import is_terminal, terminalize, terminalize_program
from .validate import validate

__all__ = [
    "DeclGroup",
    "function_groups",
    "is_terminal",
    "parse_file",
    "parse_program",
    "pretty_llbc",
    "print_place",
    "print_ty",
    "program_from_json",
    "program_to_json",
    "terminalize",
    "terminalize_program",
    "type_groups",
    "validate",
]
