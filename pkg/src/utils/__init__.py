"""Utility functions and helpers."""

from .helpers import ordered_group
from .output import (
    JSON_OPTION,
    console,
    create_table,
    dumps_json,
    emit_json,
    err_console,
    format_p_value,
    format_pm,
    print_error,
    print_info,
    print_success,
    print_warning,
    spinner,
)
from .seeding import derive_seed, rng_for, seed_sequence

__all__ = [
    "JSON_OPTION",
    "console",
    "create_table",
    "derive_seed",
    "dumps_json",
    "emit_json",
    "err_console",
    "format_p_value",
    "format_pm",
    "ordered_group",
    "print_error",
    "print_info",
    "print_success",
    "print_warning",
    "rng_for",
    "seed_sequence",
    "spinner",
]
