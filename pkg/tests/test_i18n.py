import json
import tempfile
from pathlib import Path

from mhd_wavelab import LabErrorCode, MessageCatalog


class TestMessageCatalog:
    """Test localized error messages."""

    def test_basic_translation(self):
        """Test shipped messages in both locales."""
        catalog = MessageCatalog()

        assert catalog.translate("INTERNAL_ERROR", locale="en") == "Internal error"
        assert catalog.translate("INTERNAL_ERROR", locale="uk") == "Внутрішня помилка"

    def test_placeholders_from_details(self):
        """Test {param} placeholders are filled from error details."""
        catalog = MessageCatalog()
        message = catalog.translate("BALL_EXIT", params={"sup_norm": 0.3, "radius": 0.1})

        assert message == "State norm 0.3 left the hyperbolicity ball of radius 0.1"

    def test_missing_placeholder_keeps_template(self):
        """Test a template is returned unformatted when a detail is missing."""
        catalog = MessageCatalog()
        message = catalog.translate("BALL_EXIT", params={"sup_norm": 0.3})

        assert "{radius}" in message

    def test_fallback_to_english(self):
        """Test fallback to English when a locale lacks the code."""
        with tempfile.TemporaryDirectory() as tmp:
            for locale, messages in (("en", {"BALL_EXIT": "Left the ball"}), ("de", {})):
                (Path(tmp) / locale).mkdir()
                (Path(tmp) / locale / "errors.json").write_text(json.dumps(messages), encoding="utf-8")
            catalog = MessageCatalog(locales_dir=Path(tmp))

            assert catalog.translate("BALL_EXIT", locale="de") == "Left the ball"

    def test_fallback_to_code(self):
        """Test fallback to the code string when nobody knows it."""
        catalog = MessageCatalog()

        assert catalog.translate("NOT_A_CODE", locale="uk") == "NOT_A_CODE"

    def test_default_locale(self):
        """Test the default locale is used when none is requested."""
        catalog = MessageCatalog(default_locale="uk")

        assert catalog.translate("INTERNAL_ERROR") == "Внутрішня помилка"

    def test_every_code_has_english_message(self):
        """Test the catalog covers the whole code table."""
        catalog = MessageCatalog()

        for code in LabErrorCode:
            assert catalog.translate(code.value, "en") != code.value, code

    def test_shipped_locales(self):
        """Test both shipped locales are offered."""
        assert MessageCatalog().get_available_locales() == ["en", "uk"]

    def test_custom_locales_dir(self):
        """Test loading messages from another directory."""
        with tempfile.TemporaryDirectory() as tmp:
            locale_dir = Path(tmp) / "de"
            locale_dir.mkdir()
            (locale_dir / "errors.json").write_text(
                json.dumps({"BALL_EXIT": "Kugel verlassen"}), encoding="utf-8"
            )
            catalog = MessageCatalog(locales_dir=Path(tmp))

            assert catalog.get_available_locales() == ["de"]
            assert catalog.translate("BALL_EXIT", locale="de") == "Kugel verlassen"

    def test_unreadable_file_is_skipped(self):
        """Test broken locale files do not stop the catalog from loading."""
        with tempfile.TemporaryDirectory() as tmp:
            broken = Path(tmp) / "xx"
            broken.mkdir()
            (broken / "errors.json").write_text("{not json", encoding="utf-8")
            catalog = MessageCatalog(locales_dir=Path(tmp))

            assert catalog.get_available_locales() == []
