import hashlib

import pytest

from dvpplots.figures import FigureSpec, SchemaError, build_figure, render

GOLDEN_SUMMARY = """family,alpha,sample_size,method,loss,mean,ci_lo,ci_hi,n_finite,n_infinite
skewed-vm,0.0,30,pd,kl,0.031,0.021,0.042,100,0
skewed-vm,0.5,30,pd,kl,0.055,0.044,0.066,100,0
skewed-vm,1.0,30,pd,kl,0.077,0.060,0.094,100,0
skewed-vm,0.0,30,nbic,kl,0.004,0.001,0.008,100,0
skewed-vm,0.5,30,nbic,kl,0.101,0.080,0.124,100,0
skewed-vm,1.0,30,nbic,kl,0.185,0.145,0.227,98,2
skewed-vm,0.0,100,pd,kl,0.012,0.008,0.016,100,0
skewed-vm,0.5,100,pd,kl,0.030,0.024,0.037,100,0
skewed-vm,1.0,100,pd,kl,0.041,0.032,0.050,100,0
skewed-vm,0.0,100,nbic,kl,0.002,0.001,0.004,100,0
skewed-vm,0.5,100,nbic,kl,0.080,0.066,0.095,100,0
skewed-vm,1.0,100,nbic,kl,0.150,0.120,0.180,99,1
skewed-vm,0.0,30,pd,l1,0.30,0.27,0.33,100,0
"""

GOLDEN_BASIS = """angle,j0,j1,j2,j3,j4,j5,j6
0.0,0.52,0.23,0.02,0.0,0.0,0.02,0.23
1.0,0.23,0.52,0.21,0.01,0.0,0.0,0.03
2.0,0.02,0.24,0.53,0.2,0.01,0.0,0.0
3.0,0.0,0.02,0.25,0.52,0.19,0.01,0.0
4.0,0.0,0.0,0.02,0.26,0.51,0.2,0.01
5.0,0.01,0.0,0.0,0.03,0.24,0.52,0.2
6.0,0.22,0.02,0.0,0.0,0.02,0.23,0.53
"""


@pytest.fixture
def summary_csv(tmp_path):
    path = tmp_path / "summary.csv"
    path.write_text(GOLDEN_SUMMARY)
    return path


@pytest.fixture
def basis_csv(tmp_path):
    path = tmp_path / "basis.csv"
    path.write_text(GOLDEN_BASIS)
    return path


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


class TestLossCurves:
    def test_one_line_per_method_per_panel(self, summary_csv, tmp_path):
        spec = FigureSpec(str(summary_csv), "loss-curves", str(tmp_path / "f.svg"), loss="kl")
        fig = build_figure(spec)
        assert len(fig.axes) == 2  # one panel per sample size
        for ax in fig.axes:
            _, labels = ax.get_legend_handles_labels()
            assert sorted(labels) == ["nbic", "pd"]
            # 2 methods x 3 alphas = 6 line-points per panel
            assert len(ax.containers) == 2
            assert sum(len(c.lines[0].get_xdata()) for c in ax.containers) == 6

    def test_render_produces_svg(self, summary_csv, tmp_path):
        out = tmp_path / "fig.svg"
        spec = FigureSpec(str(summary_csv), "loss-curves", str(out), loss="kl")
        assert render(spec) == str(out)
        head = out.read_text()[:200]
        assert "<?xml" in head and "svg" in head

    def test_inputs_unchanged(self, summary_csv, tmp_path):
        before = digest(summary_csv)
        render(FigureSpec(str(summary_csv), "loss-curves", str(tmp_path / "f.svg"), loss="kl"))
        assert digest(summary_csv) == before

    def test_deterministic_output(self, summary_csv, tmp_path):
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        for out in (a, b):
            render(FigureSpec(str(summary_csv), "loss-curves", str(out), loss="kl"))
        assert a.read_bytes() == b.read_bytes()

    def test_missing_ci_column_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "family,alpha,sample_size,method,loss,mean,ci_hi,n_finite,n_infinite\n"
            "w,0.0,30,pd,kl,0.1,0.2,10,0\n"
        )
        with pytest.raises(SchemaError, match="ci_lo"):
            render(FigureSpec(str(path), "loss-curves", str(tmp_path / "f.svg"), loss="kl"))

    def test_unknown_loss_rejected(self, summary_csv, tmp_path):
        with pytest.raises(SchemaError, match="hellinger"):
            render(
                FigureSpec(
                    str(summary_csv), "loss-curves", str(tmp_path / "f.svg"), loss="hellinger"
                )
            )

    def test_loss_required(self, summary_csv, tmp_path):
        with pytest.raises(SchemaError):
            FigureSpec(str(summary_csv), "loss-curves", str(tmp_path / "f.svg"))


class TestCurveFigures:
    def test_basis_curve_count(self, basis_csv, tmp_path):
        # a degree-3 dump carries 2*3+1 = 7 curve columns
        spec = FigureSpec(str(basis_csv), "basis", str(tmp_path / "b.svg"))
        fig = build_figure(spec)
        assert len(fig.axes[0].lines) == 7

    def test_targets_kind(self, basis_csv, tmp_path):
        out = tmp_path / "t.svg"
        render(FigureSpec(str(basis_csv), "targets", str(out)))
        assert out.exists()

    def test_missing_angle_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("theta,j0\n0.0,0.1\n")
        with pytest.raises(SchemaError, match="angle"):
            render(FigureSpec(str(path), "basis", str(tmp_path / "x.svg")))

    def test_non_numeric_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("angle,j0\n0.0,lots\n")
        with pytest.raises(SchemaError):
            render(FigureSpec(str(path), "basis", str(tmp_path / "x.svg")))


class TestSpecValidation:
    def test_unknown_kind(self, tmp_path):
        with pytest.raises(SchemaError):
            FigureSpec("in.csv", "heatmap", str(tmp_path / "x.svg"))

    def test_non_svg_output(self, summary_csv, tmp_path):
        with pytest.raises(SchemaError):
            render(FigureSpec(str(summary_csv), "loss-curves", str(tmp_path / "f.png"), loss="kl"))
