import json

from kscatter.cli import main


def write_quiver(tmp_path, arrows, m=2):
    from kscatter.quiver import make_quiver
    q = make_quiver(m, arrows)
    path = tmp_path / "quiver.json"
    path.write_text(q.to_text())
    return path


def test_gen(tmp_path, capsys):
    rc = main(["gen", "--m", "2", "--depth", "1", "--root", "source",
               "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    files = list(tmp_path.glob("quiver_*.json"))
    assert len(files) == 1
    data = json.loads(files[0].read_text())
    assert data["m"] == 2
    assert len(data["sinks"]) == 2 and len(data["sources"]) == 1
    assert "2 sinks" in out


def test_sort_stable_and_dump(tmp_path, capsys):
    path = write_quiver(tmp_path, [(3, 1), (3, 2)])
    rc = main(["sort", "--quiver", str(path), "--emit-dump",
               "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "stable after 2 steps" in out
    dump = (tmp_path / "diagram.txt").read_text()
    assert dump.count("\n") == 6


def test_sort_violation_exit_code(tmp_path, capsys):
    path = write_quiver(tmp_path, [(5, 1), (5, 2), (6, 2), (6, 3),
                                   (7, 2), (7, 4)], m=3)
    rc = main(["sort", "--quiver", str(path)])
    assert rc == 2
    out = capsys.readouterr().out
    assert "bracket -1 at step 7" in out


def test_sort_nilpotent_recovers(tmp_path, capsys):
    path = write_quiver(tmp_path, [(5, 1), (5, 2), (6, 2), (6, 3),
                                   (7, 2), (7, 4)], m=3)
    rc = main(["sort", "--quiver", str(path), "--mode", "nilpotent", "--k", "1"])
    assert rc == 0
    assert "stable after" in capsys.readouterr().out


def test_curves_emission(tmp_path, capsys):
    path = write_quiver(tmp_path, [(4, 1), (4, 2), (5, 2), (5, 3)])
    rc = main(["curves", "--quiver", str(path), "--emit-svg", "--emit-dump",
               "--out", str(tmp_path / "curves")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "14 curves" in out          # 5 lines + 9 commutator curves
    svgs = list((tmp_path / "curves").glob("*.svg"))
    dumps = list((tmp_path / "curves").glob("*.txt"))
    assert len(svgs) == 14 and len(dumps) == 14
    sample = max(svgs, key=lambda p: p.stat().st_size).read_text()
    assert sample.startswith("<svg") and "</svg>" in sample


def test_curves_slope_filter(tmp_path, capsys):
    path = write_quiver(tmp_path, [(4, 1), (4, 2), (5, 2), (5, 3)])
    rc = main(["curves", "--quiver", str(path), "--mu", "2/5"])
    assert rc == 0
    assert "1 curves" in capsys.readouterr().out


def test_chi_report_and_cap(tmp_path, capsys):
    rc = main(["chi", "--m", "2", "--dbar", "2", "2"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "total=3" in out
    rc = main(["chi", "--m", "2", "--dbar", "9", "9"])
    assert rc == 3
    assert "resource cap" in capsys.readouterr().out


def test_chi_emit_curves(tmp_path, capsys):
    rc = main(["chi", "--m", "2", "--dbar", "1", "2", "--emit-curves",
               "--out", str(tmp_path)])
    assert rc == 0
    assert list(tmp_path.glob("chi_*.svg"))
