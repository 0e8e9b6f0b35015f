"""
Application factory for the engine.

``create_app`` resolves a configuration class, sets up logging and returns
a :class:`CornerApp` that carries the settings and a cache of built chains
for the command-line front end and for library use.
"""
import logging
import os
import time
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from .config import config
from .shadow_engine import ChainKind, ShadowChain, build_chain
from .singular_functions import DomainConfig, SingularSeries
from .utils.config import ConfigError, configure_logging, ensure_directory_exists

logger = logging.getLogger('eddycorner')


class CornerApp:
    """Configured engine: settings, default corner geometry and a chain cache."""

    def __init__(self, name: str, settings: Dict[str, Any]):
        self.name = name
        self.config = settings
        self._chains: Dict[Tuple[int, ChainKind, float], ShadowChain] = {}

    @property
    def domain(self) -> DomainConfig:
        return DomainConfig(self.config['OMEGA'], self.config['ZETA'])

    @property
    def output_dir(self) -> Path:
        return Path(self.config['OUTPUT_DIR'])

    def chain(self, k: int, kind: ChainKind, J: int, omega: Optional[float] = None) -> ShadowChain:
        """Chain of depth ``J``; a deeper cached chain is truncated instead of rebuilt."""
        omega = self.config['OMEGA'] if omega is None else omega
        kind = ChainKind(kind)
        key = (k, kind, float(omega))
        cached = self._chains.get(key)
        if cached is None or cached.J < J:
            cached = build_chain(k, kind, J, omega)
            self._chains[key] = cached
        if cached.J == J:
            return cached
        return ShadowChain(cached.k, cached.kind, cached.omega, cached.pairs[:J + 1])

    def series(self, k: int, p: int, kind: ChainKind, m: int,
               domain: Optional[DomainConfig] = None) -> SingularSeries:
        domain = domain or self.domain
        return SingularSeries(self.chain(k, kind, m, domain.omega), p, m, domain.zeta)

    def ensure_output_dir(self) -> Path:
        return ensure_directory_exists(self.output_dir)

    def __repr__(self) -> str:
        return f'<CornerApp {self.name}>'


def create_app(config_name: Optional[str] = None, configure_logs: bool = True) -> CornerApp:
    """
    Create and configure the engine.

    Args:
        config_name: Key of :data:`eddycorner.config.config`. If None, uses the
            EDDYCORNER_ENV environment variable or 'default'.
        configure_logs: Set up the root logger from the configuration

    Returns:
        CornerApp: The configured engine

    Raises:
        ConfigError: If the configuration name is unknown
    """
    start_time = time.time()
    if config_name is None:
        config_name = os.getenv('EDDYCORNER_ENV', 'default')
    if config_name not in config:
        raise ConfigError(f'Unknown configuration {config_name!r}; choose from {sorted(config)}')
    settings = config[config_name].as_dict()

    if configure_logs:
        configure_logging(settings['LOG_LEVEL'], settings['LOG_FILE'])
    logger.info('Starting eddycorner in %s configuration', config_name)

    app = CornerApp(config_name, settings)

    init_time = time.time() - start_time
    logger.info('Engine initialized in %.2f seconds', init_time)
    return app
