import pytest

from balance_plots.cli import main


def test_response_subcommand_writes_svg(sweep_csv, tmp_path, capsys):
    out = tmp_path / "rt.svg"
    rc = main(["response", "--in", str(sweep_csv), "--out", str(out)])
    assert rc == 0
    assert out.exists()
    assert str(out) in capsys.readouterr().out


def test_completion_subcommand_png(sweep_csv, tmp_path):
    out = tmp_path / "cr.png"
    rc = main(
        ["completion", "--in", str(sweep_csv), "--out", str(out), "--format", "png"]
    )
    assert rc == 0
    assert out.read_bytes()[:4] == b"\x89PNG"


def test_utilization_subcommand(summary_json, tmp_path):
    out = tmp_path / "util.svg"
    rc = main(["utilization", "--in", str(summary_json), "--out", str(out)])
    assert rc == 0
    assert "<svg" in out.read_text()


def test_bad_header_exits_2_and_writes_nothing(tmp_path, capsys):
    src = tmp_path / "sweep.csv"
    src.write_text("load_multiplier,policy,seed\n0.8,rl,1\n")
    out = tmp_path / "rt.svg"
    rc = main(["response", "--in", str(src), "--out", str(out)])
    assert rc == 2
    assert "mean_rt" in capsys.readouterr().err
    assert not out.exists()


def test_missing_input_exits_1(tmp_path, capsys):
    out = tmp_path / "rt.svg"
    rc = main(["response", "--in", str(tmp_path / "nope.csv"), "--out", str(out)])
    assert rc == 1
    assert capsys.readouterr().err
    assert not out.exists()


def test_unknown_format_rejected_by_parser(sweep_csv, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(
            [
                "response",
                "--in",
                str(sweep_csv),
                "--out",
                str(tmp_path / "rt.pdf"),
                "--format",
                "pdf",
            ]
        )
    assert exc.value.code == 2


def test_no_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
