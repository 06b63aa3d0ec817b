import logging
import math

import numpy as np
import pytest

from mhd_wavelab import InvalidStateError, ParamsError, PhysParams, State, pressure, sound_speed, wave_speeds
from mhd_wavelab.state import COMPONENT_NAMES, STATE_SIZE, entropy_derivative, speed_terms


class TestPhysParams:
    """Test parameter validation."""

    def test_defaults(self):
        """Test the documented defaults are admissible."""
        p = PhysParams()

        assert p.H1 == 0.1
        assert p.ball_radius == pytest.approx(0.1)

    @pytest.mark.parametrize(
        "field, value",
        [("gamma", 1.0), ("A", 0.0), ("mu0", -1.0), ("H1", 0.2), ("H1", -0.1), ("alpha", 0.5), ("epsilon", 0.02)],
    )
    def test_rejects_out_of_range(self, field, value):
        """Test each bound raises ParamsError naming the field."""
        with pytest.raises(ParamsError) as exc_info:
            PhysParams(**{field: value})

        assert exc_info.value.details["field"] == field

    def test_h1_bound_tolerance(self):
        """Test H1 just past the bound is rejected and the error states the admitted tolerance."""
        with pytest.raises(ParamsError) as exc_info:
            PhysParams(H1=0.1 * (1.0 + 1e-6))

        assert exc_info.value.details["bound"].startswith("H1^2 < 0.01")
        assert "1e-09" in exc_info.value.details["bound"]

    def test_large_theta_warns(self, caplog):
        """Test data above the small-data regime only logs a warning."""
        with caplog.at_level(logging.WARNING, logger="mhd_wavelab.state"):
            p = PhysParams(theta=0.5)

        assert p.theta == 0.5
        assert "small-data regime" in caplog.text


class TestState:
    """Test the state vector."""

    def test_from_components(self):
        """Test density is stored as rho - 1."""
        state = State.from_components(u1=0.1, rho=1.2, S=0.3)

        assert state.phi.shape == (STATE_SIZE,)
        assert state.rho == pytest.approx(1.2)
        assert state.phi[3] == pytest.approx(0.2)
        assert state.u1 == pytest.approx(0.1)

    def test_zero(self):
        """Test the zero state has unit density."""
        state = State.zero()

        assert state.rho == 1.0
        assert state.ball_norm() == 0.0
        assert state.h_perp_sq == 0.0

    def test_wrong_shape(self):
        """Test State.of rejects vectors of the wrong length."""
        with pytest.raises(InvalidStateError):
            State.of([0.0] * 5)

    def test_non_positive_density(self):
        """Test validation rejects rho <= 0."""
        with pytest.raises(InvalidStateError) as exc_info:
            State.from_components(rho=0.0).validate()

        assert exc_info.value.details["component"] == "rho_minus_1"

    def test_non_finite_component(self):
        """Test validation names the non-finite component."""
        phi = np.zeros(STATE_SIZE)
        phi[5] = np.nan

        with pytest.raises(InvalidStateError) as exc_info:
            State.of(phi).validate()

        assert exc_info.value.details["component"] == COMPONENT_NAMES[5]


class TestEquationOfState:
    """Test pressure and sound speed."""

    def test_sound_speed_at_origin(self):
        """Test c = sqrt(2) at the zero state for A = 1, gamma = 2."""
        assert sound_speed(State.zero(), PhysParams()) == pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_sound_speed_other_gamma(self):
        """Test c = sqrt(5/3) for gamma = 5/3."""
        p = PhysParams(gamma=5.0 / 3.0, H1=0.0)

        assert sound_speed(State.zero(), p) == pytest.approx(math.sqrt(5.0 / 3.0), abs=1e-12)

    def test_sound_speed_matches_pressure_derivative(self):
        """Test c^2 equals a central difference of p in rho."""
        p = PhysParams()
        state = State.from_components(rho=1.05, S=0.1)
        h = 1e-6
        up = pressure(State.from_components(rho=1.05 + h, S=0.1), p)
        down = pressure(State.from_components(rho=1.05 - h, S=0.1), p)

        assert sound_speed(state, p) ** 2 == pytest.approx((up - down) / (2.0 * h), rel=1e-8)

    def test_entropy_derivative_equals_pressure(self):
        """Test dp/dS = p."""
        p = PhysParams()
        state = State.from_components(rho=0.98, S=-0.02)

        assert entropy_derivative(state, p) == pressure(state, p)


class TestWaveSpeeds:
    """Test fast, slow and Alfven speeds."""

    def test_origin(self):
        """Test cf = sqrt(2) and cs = ca = H1 at the zero state."""
        speeds = wave_speeds(State.zero(), PhysParams())

        assert speeds.cf == pytest.approx(math.sqrt(2.0), abs=1e-12)
        assert speeds.cs == pytest.approx(0.1, abs=1e-12)
        assert speeds.ca == pytest.approx(0.1, abs=1e-12)

    def test_zero_longitudinal_field(self):
        """Test ca = cs = 0 and cf^2 = mu0 H_perp^2 / rho + c^2 when H1 = 0."""
        p = PhysParams(H1=0.0)
        state = State.from_components(rho=1.03, H2=0.04, H3=-0.02, S=0.01)
        speeds = wave_speeds(state, p)
        expected = math.sqrt(p.mu0 * (0.04**2 + 0.02**2) / 1.03 + sound_speed(state, p) ** 2)

        assert speeds.ca == 0.0
        assert speeds.cs == 0.0
        assert speeds.cf == pytest.approx(expected, rel=1e-12)

    def test_roots_of_the_quartic(self):
        """Test cf and cs are roots of mu^4 - (mu0|H|^2/rho + c^2) mu^2 + mu0 H1^2 c^2 / rho."""
        p = PhysParams()
        state = State.from_components(H2=0.05, H3=0.02)
        speeds = wave_speeds(state, p)
        h_sq = p.H1**2 + 0.05**2 + 0.02**2
        c2 = speeds.c**2

        for mu in (speeds.cf, speeds.cs):
            value = mu**4 - (p.mu0 * h_sq + c2) * mu**2 + p.mu0 * p.H1**2 * c2
            assert abs(value) < 1e-12

    def test_ordering(self):
        """Test cf >= ca >= cs >= 0 with cs < ca once H_perp is non-zero."""
        speeds = wave_speeds(State.from_components(H2=0.03), PhysParams())

        assert speeds.cf > speeds.ca > speeds.cs > 0

    def test_vectorized_terms(self):
        """Test speed_terms evaluates a batch at once."""
        phi = np.zeros((4, STATE_SIZE))
        phi[:, 3] = [0.0, 0.01, -0.01, 0.02]
        terms = speed_terms(phi, PhysParams())

        assert terms.cf.shape == (4,)
        assert terms.c[0] == pytest.approx(math.sqrt(2.0))
