"""
Typically-Correct Derandomization Toolkit
Command-line entry point: simulation, hybrids, extractors, generators and experiments
"""

import logging

from app.commands import cli
from app.config import settings

# Configure logging
logging.basicConfig(level=settings.LOG_LEVEL)
logger = logging.getLogger(__name__)


if __name__ == "__main__":
    logger.debug(f"Starting {settings.APP_NAME} {settings.APP_VERSION}")
    cli()
