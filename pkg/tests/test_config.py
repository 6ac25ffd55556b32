"""Sectioned run-configuration files: parsing, validation, round-trips."""
import pytest

from varan.config import RunConfig, dump_config, load_config
from varan.errors import ConfigError

GOOD = """\
[function]
name = quad_s
s = 2.5

[anchor]
x = 0.0
v = 0.0

[run]
lambda = auto
epsilon = 0.4
delta = 0.3
seed = 7
out = runs/demo

[grids]
bundle_levels = 6
svar_pts_per_axis = 41
"""


def test_load_full_config(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text(GOOD)
    cfg = load_config(str(p))
    assert cfg.function == "quad_s"
    assert cfg.params == {"s": 2.5}
    assert cfg.lam is None  # auto
    assert cfg.epsilon == 0.4 and cfg.delta == 0.3 and cfg.seed == 7
    assert cfg.bundle_levels == 6 and cfg.svar_pts_per_axis == 41
    # untouched knobs keep their defaults
    assert cfg.bundle_per_shell == 32


def test_missing_file_raises():
    with pytest.raises(ConfigError, match="not found"):
        load_config("/nonexistent/run.cfg")


@pytest.mark.parametrize(
    "mutation, path",
    [
        ("[run]\nlambda = -0.5", "run.lambda"),
        ("[run]\nepsilon = 0", "run.epsilon"),
        ("[run]\nwhat = 1", "run.what"),
        ("[anchor]\ny = 1", "anchor.y"),
        ("[grids]\nbundle_levels = 1", "grids.bundle_levels"),
        ("[grids]\nunknown_knob = 3", "grids.unknown_knob"),
        ("[grids]\nbundle_rho0 = tiny", "grids.bundle_rho0"),
        ("[mystery]\nk = 1", "mystery"),
    ],
)
def test_bad_configs_report_field_paths(tmp_path, mutation, path):
    p = tmp_path / "bad.cfg"
    p.write_text(f"[function]\nname = quad_s\n\n{mutation}\n")
    with pytest.raises(ConfigError, match=path.replace(".", r"\.")):
        load_config(str(p))


def test_anchor_length_mismatch():
    with pytest.raises(ConfigError, match="anchor.v"):
        RunConfig(anchor_x=(0.0, 0.0), anchor_v=(0.0,))


def test_bundle_variant_restricted():
    with pytest.raises(ConfigError, match="bundle_variant"):
        RunConfig(bundle_variant="experimental")


def test_dump_load_roundtrip(tmp_path):
    cfg = RunConfig(
        function="huber",
        params={"delta": 1.0},
        anchor_x=(1.0,),
        anchor_v=(1.0,),
        lam=0.125,
        epsilon=0.45,
        bundle_levels=7,
        svar_radius=0.3,
    )
    p = tmp_path / "round.cfg"
    p.write_text(dump_config(cfg))
    back = load_config(str(p))
    assert back.to_dict() == cfg.to_dict()


def test_vector_anchors_parse_both_separators(tmp_path):
    p = tmp_path / "v.cfg"
    p.write_text("[function]\nname = abs\ndim = 2\n\n[anchor]\nx = 0.5, -0.25\nv = 1 0\n")
    cfg = load_config(str(p))
    assert cfg.anchor_x == (0.5, -0.25)
    assert cfg.anchor_v == (1.0, 0.0)
    assert cfg.x.shape == (2,)
