"""Quantum Hall edge-state simulations."""

from ._hallsim import (
    ConfigError,
    NumericalError,
    channel_energies,
    commands,
    constants_ledger,
    digamma,
    disorder_field,
    free_resolvent,
    kernel_modulus,
    laguerre,
    run,
    tricomi_psi,
)

__all__ = [
    "ConfigError",
    "NumericalError",
    "channel_energies",
    "commands",
    "constants_ledger",
    "digamma",
    "disorder_field",
    "free_resolvent",
    "kernel_modulus",
    "laguerre",
    "run",
    "tricomi_psi",
]
