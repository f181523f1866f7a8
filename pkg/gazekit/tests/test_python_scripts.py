import runpy
from pathlib import Path

import pytest

SCRIPTS_DIR = Path(__file__).resolve().parents[2] / "python_scripts"
SCRIPTS = sorted(SCRIPTS_DIR.glob("*.py")) if SCRIPTS_DIR.is_dir() else []


@pytest.mark.skipif(not SCRIPTS, reason="walkthrough scripts not available")
@pytest.mark.parametrize("script", SCRIPTS, ids=lambda path: path.stem)
def test_walkthrough_runs(script, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    runpy.run_path(str(script), run_name="__main__")
