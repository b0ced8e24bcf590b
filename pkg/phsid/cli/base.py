import logging
import sys

from django.core.management.base import BaseCommand, CommandError

from phsid.core.exceptions import (
    DivergenceError,
    InvariantError,
    LineSearchError,
    MalformedFileError,
    SingularStepError,
)

EXIT_INVALID = 1
EXIT_NOT_CONVERGED = 2
EXIT_NUMERICAL = 3

VERBOSITY_LEVELS = {2: logging.INFO, 3: logging.DEBUG}


class PHSCommand(BaseCommand):
    """Base for phsid commands: maps the error hierarchy onto exit codes.

    0 success, 1 invalid input or usage, 2 no convergence, 3 numerical failure.
    """

    requires_system_checks = []

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        # Usage errors become CommandError (exit 1) instead of argparse's exit 2.
        parser.called_from_command_line = False
        return parser

    def run_from_argv(self, argv):
        try:
            super().run_from_argv(argv)
        except CommandError as e:
            self.stderr.write(f"{e.__class__.__name__}: {e}")
            sys.exit(e.returncode)

    def execute(self, *args, **options):
        level = VERBOSITY_LEVELS.get(options.get("verbosity", 1))
        if level is not None:
            logging.getLogger("phsid").setLevel(level)

        try:
            return super().execute(*args, **options)
        except (InvariantError, MalformedFileError) as e:
            raise CommandError(str(e), returncode=EXIT_INVALID) from e
        except (DivergenceError, SingularStepError, LineSearchError) as e:
            raise CommandError(str(e), returncode=EXIT_NUMERICAL) from e
