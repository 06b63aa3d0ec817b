import pytest

from mhd_wavelab import ConfigError, ParamsError, Regime
from mhd_wavelab.config import Command, ExperimentSettings, load_config, parse_override, read_config_file
from mhd_wavelab.experiments import InitialDataKind

CONFIG_TEXT = """
[params]
H1 = 0.0
theta = 0.005

[solver]
nodes = 512

[experiment]
kind = illposedness
etas = 0.1, 0.05
t_max = none

[run]
command = simulate
regime = euler
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "lab.ini"
    path.write_text(CONFIG_TEXT, encoding="utf-8")
    return path


class TestDefaults:
    """Test built-in defaults."""

    def test_defaults(self):
        """Test an empty configuration resolves to the documented defaults."""
        config = load_config()

        assert config.params.H1 == 0.1
        assert config.solver.nodes == 2**14
        assert config.experiment.kind is InitialDataKind.SHOCK
        assert config.run.command is None
        assert config.regime is Regime.MHD

    def test_regime_follows_h1(self):
        """Test H1 = 0 selects the degenerate regime when none is given."""
        config = load_config(overrides=["params.H1=0"])

        assert config.regime is Regime.H1ZERO


class TestConfigFile:
    """Test the sectioned config file."""

    def test_read(self, config_file):
        """Test values are typed and keys keep their case."""
        config = load_config(config_file)

        assert config.params.H1 == 0.0
        assert config.params.theta == 0.005
        assert config.solver.nodes == 512
        assert config.experiment.kind is InitialDataKind.ILLPOSEDNESS
        assert config.experiment.etas == [0.1, 0.05]
        assert config.experiment.t_max is None
        assert config.run.command is Command.SIMULATE
        assert config.regime is Regime.EULER

    def test_raw_values(self, config_file):
        """Test the raw reader returns strings per section."""
        raw = read_config_file(config_file)

        assert raw["params"]["H1"] == "0.0"

    def test_unknown_key(self, tmp_path):
        """Test unknown keys are rejected with their section."""
        path = tmp_path / "bad.ini"
        path.write_text("[solver]\nnodez = 12\n", encoding="utf-8")

        with pytest.raises(ConfigError) as exc_info:
            load_config(path)

        assert exc_info.value.details["section"] == "solver"
        assert exc_info.value.details["key"] == "nodez"

    def test_unknown_section(self, tmp_path):
        """Test unknown sections are rejected."""
        path = tmp_path / "bad.ini"
        path.write_text("[plot]\ncolour = red\n", encoding="utf-8")

        with pytest.raises(ConfigError):
            load_config(path)

    def test_missing_file(self, tmp_path):
        """Test an unreadable file raises ConfigError."""
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.ini")

    def test_malformed_file(self, tmp_path):
        """Test text without a section header raises ConfigError."""
        path = tmp_path / "bad.ini"
        path.write_text("nodes = 12\n", encoding="utf-8")

        with pytest.raises(ConfigError):
            load_config(path)


class TestOverrides:
    """Test command-line precedence."""

    def test_override_beats_file(self, config_file):
        """Test --set values win over the file and flags win over --set."""
        config = load_config(
            config_file,
            overrides=["solver.nodes=256", "run.seed=3"],
            flags={"run": {"seed": 7, "threads": None}},
        )

        assert config.solver.nodes == 256
        assert config.run.seed == 7
        assert config.run.threads == 1

    @pytest.mark.parametrize("item", ["nodes=12", "solver.nodes", "=3", "solver.=3"])
    def test_malformed_override(self, item):
        """Test overrides must look like section.key=value."""
        with pytest.raises(ConfigError):
            parse_override(item)

    def test_bad_type(self):
        """Test values that do not convert raise ConfigError."""
        with pytest.raises(ConfigError) as exc_info:
            load_config(overrides=["solver.nodes=many"])

        assert exc_info.value.details["section"] == "solver"

    def test_out_of_range(self):
        """Test range checks of the sections still apply."""
        with pytest.raises(ParamsError):
            load_config(overrides=["params.gamma=0.5"])


class TestExperimentSettings:
    """Test experiment knobs."""

    @pytest.mark.parametrize(
        "kwargs", [{"t_max": 0.0}, {"etas": []}, {"w0_factors": [1.0, -2.0]}, {"refinements": [4]}, {"trace_count": 0}]
    )
    def test_rejects(self, kwargs):
        """Test inadmissible experiment settings raise ParamsError."""
        with pytest.raises(ParamsError):
            ExperimentSettings(**kwargs)

    def test_round_trip_dict(self):
        """Test to_dict gives plain values."""
        data = load_config().to_dict()

        assert data["solver"]["cfl"] == 0.4
        assert data["experiment"]["kind"] == "shock"
