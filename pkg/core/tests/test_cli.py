import sys
from pathlib import Path

import yaml

# Add parent directory to path so we can import core modules
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from core.cli import build_parser, main


def write_config(path, **settings):
    base = {"profile": "flat", "n_nodes": 21, "n_k": 3, "gamma": 1e-4, "max_iters": 5}
    base.update(settings)
    path.write_text(yaml.safe_dump(base))
    return path


def test_parser_defaults():
    args = build_parser().parse_args(["invert"])
    assert args.cmd == "invert"
    assert args.config is None
    assert args.log_level == "INFO"


def test_forward_command(tmp_path):
    config = write_config(tmp_path / "run.yaml")
    out = tmp_path / "results"
    assert main(["forward", "--config", str(config), "--out", str(out), "--threads", "1"]) == 0
    assert (out / "data.tsv").is_file()
    assert (out / "manifest.json").is_file()


def test_invert_command_with_seed(tmp_path):
    config = write_config(tmp_path / "run.yaml", delta=0.01)
    out = tmp_path / "results"
    assert main(["invert", "--config", str(config), "--out", str(out), "--seed", "3"]) == 0
    assert (out / "sigma.tsv").is_file()


def test_invalid_config_exits_with_error(tmp_path, caplog):
    config = write_config(tmp_path / "bad.yaml", lamda=2.0)
    assert main(["invert", "--config", str(config), "--out", str(tmp_path / "results")]) == 1
    assert "unknown configuration key 'lamda'" in caplog.text
