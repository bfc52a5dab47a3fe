"""
Typically-correct derandomization toolkit package
"""

from .config import settings

__version__ = settings.APP_VERSION
__app_name__ = settings.APP_NAME
