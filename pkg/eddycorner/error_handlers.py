"""
Mapping of engine exceptions to command-line exit codes.

Usage and configuration problems exit with 1, failed numerical checks and
other engine errors with 2.
"""
import logging
from functools import wraps

import click

from .exceptions import CornerError, DomainError, VerificationError
from .utils.config import ConfigError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class CornerGroup(click.Group):
    """Click group whose usage errors exit with :data:`EXIT_USAGE` instead of click's 2."""

    def make_context(self, *args, **kwargs):
        try:
            return super().make_context(*args, **kwargs)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise


def handle_errors(f):
    """
    Decorator for commands: configuration and domain errors become usage
    errors, other engine errors are echoed to stderr and exit with 2.
    """
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except (ConfigError, DomainError) as e:
            logger.warning('usage error in %s: %s', f.__name__, e)
            raise click.UsageError(str(e))
        except VerificationError as e:
            click.echo(f'Verification failed: {e}', err=True)
            click.get_current_context().exit(EXIT_NUMERICAL)
        except CornerError as e:
            logger.error('%s failed: %s', f.__name__, e, exc_info=True)
            click.echo(f'Error in {f.__name__}: {e}', err=True)
            click.get_current_context().exit(EXIT_NUMERICAL)

    return decorated_function
