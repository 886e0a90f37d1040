from .types import RunConfig, RunResult, EXIT_OK, EXIT_IO, EXIT_VALIDATION, EXIT_NOT_CONVERGED
from .engine import run_command, COMMANDS
