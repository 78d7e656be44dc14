import importlib.util
from pathlib import Path

SCRIPT = Path(__file__).resolve().parents[1] / "scripts" / "reproduce_figures.py"


def test_figure_pipelines_run(tmp_path):
    spec = importlib.util.spec_from_file_location("reproduce_figures", SCRIPT)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    assert mod.run(tmp_path) == 0
    for name in mod.RUNS:
        lines = [ln for ln in (tmp_path / f"{name}.csv").read_text().splitlines() if not ln.startswith("#")]
        assert len(lines) > 2
