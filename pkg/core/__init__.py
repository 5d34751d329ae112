"""Public API for the core package.

Importing `core` gives quick access to the experiment commands
while still allowing power-users to reach into the sub-packages.
"""

from .pipeline import (
    PACKAGE_VERSION as __version__,
    DataSourceFactory,
    invert_config,
    invert_data,
    run_forward,
    run_invert,
    run_sweep,
    run_verify,
)

__all__: list[str] = [
    "__version__",
    "DataSourceFactory",
    "invert_config",
    "invert_data",
    "run_forward",
    "run_invert",
    "run_sweep",
    "run_verify",
]
