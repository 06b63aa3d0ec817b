import json
from datetime import datetime

import pytest

from mhd_wavelab import (
    BallExitError,
    ConfigError,
    IndexContractError,
    InvariantFailure,
    LabError,
    LabErrorCode,
    ParamsError,
    StencilError,
)
from mhd_wavelab.core import EXIT_CODE_MAP, ErrorRenderer, RenderFormat, get_exit_code


class TestLabError:
    """Test the base error class."""

    def test_creation(self):
        """Test basic LabError creation."""
        error = LabError(code=LabErrorCode.BALL_EXIT, message="left the ball", details={"sup_norm": 0.3})

        assert error.code == LabErrorCode.BALL_EXIT
        assert error.message == "left the ball"
        assert error.details["sup_norm"] == 0.3
        assert isinstance(error.timestamp, datetime)
        assert error.run_id
        assert error.exit_code == EXIT_CODE_MAP[LabErrorCode.BALL_EXIT]

    def test_string_code_creates_pseudo_member(self):
        """Test LabError with a custom string code."""
        error = LabError(code="CUSTOM_CHECK", message="custom")

        assert error.code == LabErrorCode("CUSTOM_CHECK")
        assert error.exit_code == get_exit_code(LabErrorCode.INTERNAL_ERROR)

    def test_explicit_zero_exit_code(self):
        """Test an explicit exit code of zero is kept."""
        error = LabError(LabErrorCode.INVARIANT_FAILED, "recorded only", exit_code=0)

        assert error.exit_code == 0

    def test_to_dict(self):
        """Test LabError to_dict conversion."""
        error = LabError(LabErrorCode.STENCIL_ERROR, "bad stencil", {"step": 1e-5}, module="coefficients")
        data = error.to_dict()["error"]

        assert data["code"] == "STENCIL_ERROR"
        assert data["module"] == "coefficients"
        assert data["details"]["step"] == 1e-5
        assert data["timestamp"].endswith("Z")


class TestModuleErrors:
    """Test subclasses that gather keyword arguments into details."""

    def test_params_error(self):
        """Test ParamsError details and provenance."""
        error = ParamsError("bad gamma", field="gamma", value=0.5, bound="> 1")

        assert error.code == LabErrorCode.INVALID_PARAMS
        assert error.module == "core-state"
        assert error.details == {"field": "gamma", "value": 0.5, "bound": "> 1"}

    def test_default_message_is_title(self):
        """Test subclasses fall back to their title."""
        error = StencilError(step=1e-5, direction=-1)

        assert error.message == "Non-smooth stencil"
        assert error.details["direction"] == -1

    def test_module_override(self):
        """Test errors raised on behalf of another module keep that provenance."""
        error = BallExitError(sup_norm=0.2, radius=0.1, module="decomposition")

        assert error.module == "decomposition"
        assert BallExitError(sup_norm=0.2).module == "solver"

    def test_index_contract_lists_indices(self):
        """Test IndexContractError stores indices as a list."""
        error = IndexContractError(indices=(1, 9), family_count=7)

        assert error.details["indices"] == [1, 9]
        assert error.exit_code == EXIT_CODE_MAP[LabErrorCode.INDEX_CONTRACT]

    def test_errors_are_raisable(self):
        """Test module errors behave like exceptions."""
        with pytest.raises(LabError) as exc_info:
            raise ConfigError("unknown key", section="solver", key="nodez")

        assert exc_info.value.details["key"] == "nodez"


class TestExitCodes:
    """Test the exit code table."""

    def test_codes_are_distinct(self):
        """Test every code maps to its own exit status."""
        values = list(EXIT_CODE_MAP.values())

        assert len(values) == len(set(values))
        assert 0 not in values
        assert 2 not in values

    def test_every_code_is_mapped(self):
        """Test no enum member is missing from the table."""
        assert set(EXIT_CODE_MAP) == set(LabErrorCode)


class TestRenderer:
    """Test error rendering for summary.json and the terminal."""

    def test_json_omits_trace_fields(self):
        """Test JSON rendering is deterministic by default."""
        error = InvariantFailure(failed=["duality"], module="eigensystem")
        payload = ErrorRenderer(RenderFormat.JSON).render(error, message="failed").payload

        block = payload["error"]
        assert block["code"] == "INVARIANT_FAILED"
        assert block["details"]["failed"] == ["duality"]
        assert "timestamp" not in block
        assert "run_id" not in block
        json.dumps(payload)

    def test_json_with_trace_fields(self):
        """Test trace fields are included on request."""
        error = InvariantFailure(failed=["duality"])
        payload = ErrorRenderer(RenderFormat.JSON, include_trace=True).render(error, message="x").payload

        assert payload["error"]["run_id"] == error.run_id
        assert payload["error"]["timestamp"].endswith("Z")

    def test_text_line(self):
        """Test text rendering lists sorted details."""
        error = ParamsError(field="H1", value=0.5, bound="H1^2 <= 0.01")
        result = ErrorRenderer(RenderFormat.TEXT).render(error, message="too strong")

        assert result.media_type == "text/plain"
        assert result.payload.startswith("error[INVALID_PARAMS] in core-state: too strong")
        assert "bound=H1^2 <= 0.01, field=H1" in result.payload
