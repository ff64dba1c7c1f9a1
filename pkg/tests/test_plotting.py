from modop.harness import SuiteConfig, run_suite
from modop.plotting import render_report_figures


def test_figures_written(tmp_path):
    report = run_suite(SuiteConfig(trials=3, seed=2))
    paths = render_report_figures(report, tmp_path / "nested")
    assert [p.name for p in paths] == ["outcomes.png", "margins.png", "worst_residuals.png"]
    for p in paths:
        assert p.stat().st_size > 1000
        assert p.read_bytes()[:4] == b"\x89PNG"


def test_figures_for_single_suite(tmp_path):
    report = run_suite(SuiteConfig(trials=1, suites=("kaplansky",)))
    assert len(render_report_figures(report, tmp_path)) == 3
