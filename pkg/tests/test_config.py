import pytest

from qmflow.config import ConfigError, load_spec


def _write(tmp_path, text):
    path = tmp_path / "run.ini"
    path.write_text(text)
    return str(path)


def test_full_config(tmp_path):
    path = _write(tmp_path, """
[space]
K = -1
n = 3
[flow]
ell = 2
N = 128
t_end = 2.0
feedback = yes
[initial]
preset = elongated
delta = 0.06
seed = 7
[elliptic]
equation = soliton
f = harmonic
[sweep]
ell = 0, 1, 2
cfl = 0.1, 0.2
[output]
samples = 40
""")
    spec = load_spec(path)
    assert spec.sf.K == -1 and spec.sf.n == 3
    assert spec.flow.ell == 2 and spec.flow.N == 128 and spec.flow.feedback is True
    assert spec.preset == "elongated" and spec.preset_params == {"delta": 0.06}
    assert spec.seed == 7
    assert spec.elliptic["equation"] == "soliton" and spec.elliptic["f"] == "harmonic"
    assert spec.sweep == {"ell": [0, 1, 2], "cfl": [0.1, 0.2]}
    assert spec.flow.sample_dt == pytest.approx(0.05)


@pytest.mark.parametrize("text, line, field", [
    ("[space]\nK = 1\n[flow]\nell = 7\n", 3, "[flow]"),
    ("[flow]\nN = 128\nbogus = 1\n", 3, "bogus"),
    ("[initial]\npreset = sphere\ndelta = 0.1\n", 3, "delta"),
    ("[initial]\npreset = blob\n", 2, "preset"),
    ("[space]\nK = 1\nn = two\n", 1, "[space]"),
    ("[flow]\nfeedback = maybe\n", 2, "feedback"),
    ("[sweep]\nell = 0, x\n", 2, "ell"),
])
def test_malformed_configs_name_line_and_field(tmp_path, text, line, field):
    path = _write(tmp_path, text)
    with pytest.raises(ConfigError) as exc:
        load_spec(path)
    msg = str(exc.value)
    assert f"{path}:{line}:" in msg and field in msg


def test_unknown_section_and_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="unknown section"):
        load_spec(_write(tmp_path, "[solver]\nx = 1\n"))
    with pytest.raises(ConfigError, match="cannot read"):
        load_spec(str(tmp_path / "missing.ini"))


def test_preset_string_routes_overrides():
    spec = load_spec(preset="off-center offset=0.1 K=-1 ell=1 t_end=3", samples=30)
    assert spec.preset == "off-center" and spec.preset_params == {"offset": 0.1}
    assert spec.sf.K == -1 and spec.flow.ell == 1 and spec.flow.t_end == 3
    assert spec.flow.sample_dt == pytest.approx(0.1)
    with pytest.raises(ConfigError, match="--preset"):
        load_spec(preset="sphere delta")
    with pytest.raises(ConfigError, match="--preset radius"):
        load_spec(preset="sphere radius=1")


def test_preset_overrides_config_initial(tmp_path):
    path = _write(tmp_path, "[initial]\npreset = elongated\ndelta = 0.06\nseed = 3\n")
    spec = load_spec(path, preset="sphere R=0.5", seed=None)
    assert spec.preset == "sphere" and spec.preset_params == {"R": 0.5} and spec.seed == 3
