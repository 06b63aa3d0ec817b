import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)


class MessageCatalog:
    """Localized messages for lab error codes."""

    def __init__(self, locales_dir: Optional[Path] = None, default_locale: str = "en"):
        """
        Initialize the catalog.

        Args:
            locales_dir: Directory containing ``<locale>/errors.json`` files
            default_locale: Locale used when none is requested
        """
        self.locales_dir = locales_dir or Path(__file__).parent / "locales"
        self.default_locale = default_locale
        self._messages: Dict[str, Dict[str, str]] = {}
        self._load_messages()

    def _load_messages(self) -> None:
        for locale_file in sorted(self.locales_dir.glob("*/errors.json")):
            locale = locale_file.parent.name
            try:
                with open(locale_file, "r", encoding="utf-8") as f:
                    self._messages[locale] = json.load(f)
            except (OSError, json.JSONDecodeError):
                logger.warning(
                    "Skipping unreadable message file",
                    extra={"locale": locale, "path": str(locale_file)},
                )

    def translate(
        self,
        error_code: str,
        locale: Optional[str] = None,
        params: Optional[Dict[str, Any]] = None,
    ) -> str:
        """
        Look up the message for an error code.

        Args:
            error_code: Error code to translate
            locale: Locale to use (e.g., 'en', 'uk')
            params: Values for ``{placeholder}`` fields, usually the error details

        Returns:
            Formatted message, or the code itself when no locale knows it
        """
        locale = locale or self.default_locale

        message = self._messages.get(locale, {}).get(error_code)
        if message is None and locale != "en":
            message = self._messages.get("en", {}).get(error_code)
        if message is None:
            return error_code
        return self._format_message(message, params)

    def _format_message(self, message: str, params: Optional[Dict[str, Any]]) -> str:
        if not params:
            return message
        try:
            return message.format(**params)
        except (KeyError, IndexError, ValueError):
            # Template needs a detail the error did not carry
            return message

    def get_available_locales(self) -> list[str]:
        """Locales with a readable message file, in directory order."""
        return list(self._messages.keys())
