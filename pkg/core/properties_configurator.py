"""
Properties configurator for the pwcycles run settings (tolerances, schedules, output paths)
"""
import logging
import os
import re
import threading
from typing import Optional, List, Dict

logger = logging.getLogger(__name__)

DEFAULT_PROPERTIES_FILES = ['config/application.properties']


class PropertiesConfigurator:
    """
    Singleton thread-safe class for managing properties from configuration files.
    Supports ${...} value resolution against the environment first, then other properties.
    """
    _instance = None
    _lock = threading.Lock()

    def __new__(cls, *args, **kwargs):
        if not cls._instance:
            with cls._lock:
                if not cls._instance:
                    cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self, properties_files: List[str] = None):
        """
        Initialize the PropertiesConfigurator

        Args:
            properties_files: List of property file paths, later files override earlier ones
        """
        if hasattr(self, '_initialized'):
            return

        self._initialized = True
        self._properties_files = properties_files or list(DEFAULT_PROPERTIES_FILES)
        self._properties: Dict[str, str] = {}
        self._properties_lock = threading.RLock()

        self.reload()

    @classmethod
    def reset(cls):
        """Drop the shared instance so the next construction re-reads its files"""
        with cls._lock:
            cls._instance = None

    def reload(self):
        """Re-read all configured files and resolve references"""
        with self._properties_lock:
            raw: Dict[str, str] = {}
            for file_path in self._properties_files:
                if not os.path.exists(file_path):
                    logger.debug(f"Properties file not found, skipped: {file_path}")
                    continue
                raw.update(self._parse_file(file_path))
            self._properties = {
                key: self._resolve_value(value, raw, {key}) for key, value in raw.items()
            }
            logger.info(f"Loaded {len(self._properties)} properties from {self._properties_files}")

    @staticmethod
    def _parse_file(file_path: str) -> Dict[str, str]:
        parsed: Dict[str, str] = {}
        try:
            with open(file_path, 'r', encoding='utf-8') as f:
                for line in f:
                    line = line.strip()
                    if not line or line.startswith('#') or line.startswith('//'):
                        continue
                    if '=' not in line:
                        continue
                    key, value = line.split('=', 1)
                    key = key.strip()
                    if key:
                        parsed[key] = value.strip()
        except OSError as e:
            logger.error(f"Error loading properties from {file_path}: {e}")
        return parsed

    def _resolve_value(self, value: str, properties: Dict[str, str], visited: set) -> str:
        """
        Resolve ${key} references in a value

        Args:
            value: The value to resolve
            properties: Raw (unresolved) properties
            visited: Keys already on the resolution path (circular references stay literal)

        Returns:
            Resolved value; unknown references are left as written
        """
        if not value or '${' not in value:
            return value

        def substitute(match):
            ref_key = match.group(1)
            if ref_key in visited:
                return match.group(0)
            replacement = os.environ.get(ref_key)
            if replacement is not None:
                return replacement
            if ref_key in properties:
                return self._resolve_value(properties[ref_key], properties, visited | {ref_key})
            return match.group(0)

        return re.sub(r'\$\{([^{}]+)\}', substitute, value)

    def get(self, key: str, default_value: Optional[str] = None) -> Optional[str]:
        """
        Get a property value by key. Values still holding an unresolved ${...} count as missing.

        Args:
            key: Property key
            default_value: Default value if key not found

        Returns:
            Property value or default_value
        """
        with self._properties_lock:
            value = self._properties.get(key)
        if value is None or '${' in value:
            return default_value
        return value

    def get_int(self, key: str, default_value: Optional[int] = None) -> Optional[int]:
        value = self.get(key)
        if value is None:
            return default_value
        try:
            return int(value)
        except (ValueError, TypeError):
            logger.warning(f"Property {key}={value!r} is not an integer, using {default_value}")
            return default_value

    def get_float(self, key: str, default_value: Optional[float] = None) -> Optional[float]:
        value = self.get(key)
        if value is None:
            return default_value
        try:
            return float(value)
        except (ValueError, TypeError):
            logger.warning(f"Property {key}={value!r} is not a number, using {default_value}")
            return default_value

    def get_bool(self, key: str, default_value: bool = False) -> bool:
        value = self.get(key)
        if value is None:
            return default_value
        return value.lower() in ('true', 'yes', '1', 'on')

    def get_list(self, key: str, delim: str = ',') -> Optional[List[str]]:
        value = self.get(key)
        if value is None:
            return None
        return [item.strip() for item in value.split(delim) if item.strip()]

    def get_float_list(self, key: str, delim: str = ',') -> Optional[List[float]]:
        """
        Get a property value as list of floats

        Args:
            key: Property key
            delim: Delimiter for splitting (default: ',')

        Returns:
            List of floats, or None when the key is missing or no item parses
        """
        str_list = self.get_list(key, delim)
        if str_list is None:
            return None

        result = []
        for item in str_list:
            try:
                result.append(float(item))
            except ValueError:
                logger.warning(f"Skipping non-numeric item {item!r} in {key}")
        return result or None
