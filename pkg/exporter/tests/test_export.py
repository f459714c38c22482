"""End-to-end export conformance against the downstream scoring tool."""

import numpy as np
import pytest

from oodbench.cli import main as oodbench_main
from oodbench.experiments import cell_scores
from oodbench.io import ingest_as_model, read_feature_file, write_feature_file

from oodexport.cli import main
from oodexport.data import DatasetError, make_split, parse_split
from oodexport.extract import extract, odin_preprocess
from oodexport.job import ExportJob, GridEntry, export, parse_grid_entry
from oodexport.net import load_checkpoint, save_checkpoint, train_net

GRID = (GridEntry("odin", 1000.0, 0.0014), GridEntry("maha", None, 0.01))
UNTAGGED = ("blobs_id_train.oodf", "blobs_id_test.oodf",
            "stripes_ood_test.oodf")
TAGGED = ("blobs_id_test__odin_T1000_eps0.0014.oodf",
          "stripes_ood_test__odin_T1000_eps0.0014.oodf",
          "blobs_id_test__maha_eps0.01.oodf",
          "stripes_ood_test__maha_eps0.01.oodf")


def make_job(checkpoint, out_dir, grid=GRID):
    return ExportJob(str(checkpoint), parse_split("blobs,seed=0,n=64"),
                     parse_split("blobs,seed=1,n=32"),
                     parse_split("stripes,seed=2,n=32"), str(out_dir), grid)


@pytest.fixture(scope="session")
def checkpoint(tmp_path_factory):
    path = tmp_path_factory.mktemp("ckpt") / "net.pt"
    images, labels = make_split(parse_split("blobs,seed=0,n=64"))
    net, _ = train_net(images, labels, epochs=60)
    save_checkpoint(net, path)
    return path


@pytest.fixture(scope="session")
def export_dir(tmp_path_factory, checkpoint):
    out = tmp_path_factory.mktemp("feats")
    export(make_job(checkpoint, out))
    return out


def test_export_writes_expected_files(export_dir):
    names = sorted(p.name for p in export_dir.iterdir())
    assert names == sorted(UNTAGGED + TAGGED)


def test_exports_pass_downstream_ingest_check(export_dir, capsys):
    files = sorted(str(p) for p in export_dir.iterdir())
    code = oodbench_main(["ingest-check"] + files)
    out = capsys.readouterr().out
    assert code == 0
    assert out.count(": ok") == len(files) + 1  # per file + cross-set line
    assert "cross-set ingest: ok" in out


def test_eps_zero_entries_skipped(checkpoint, tmp_path):
    grid = (GridEntry("odin", 1000.0, 0.0), GridEntry("maha", None, 0.0))
    written, skipped = export(make_job(checkpoint, tmp_path, grid))
    assert sorted(p.split("/")[-1] for p in written) == sorted(UNTAGGED)
    assert skipped == list(grid)
    # the nudge at eps = 0 is the identity, so the untagged arrays already
    # are the "preprocessed" ones, byte for byte
    net = load_checkpoint(checkpoint)
    test_images, _ = make_split(parse_split("blobs,seed=1,n=32"))
    plain_emb, plain_logits = extract(net, test_images)
    nudged = odin_preprocess(net, test_images, 1000.0, 0.0)
    nudged_emb, nudged_logits = extract(net, nudged)
    assert plain_emb.tobytes() == nudged_emb.tobytes()
    assert plain_logits.tobytes() == nudged_logits.tobytes()
    stored = read_feature_file(tmp_path / "blobs_id_test.oodf")
    assert stored.embeddings.tobytes() == plain_emb.tobytes()


def test_export_is_deterministic(checkpoint, tmp_path):
    export(make_job(checkpoint, tmp_path / "a"))
    export(make_job(checkpoint, tmp_path / "b"))
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(UNTAGGED + TAGGED)
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()


def bundle_scores(directory):
    """Every detector's (id, ood) scores from one directory of files."""
    train = read_feature_file(directory / "blobs_id_train.oodf")
    tests = [read_feature_file(directory / name)
             for name in UNTAGGED[1:] + TAGGED]
    ing = ingest_as_model(train, tests)
    id_slot = ing.slot("blobs", "id_test")
    ood_slot = ing.slot("stripes", "ood_test")
    out = {}
    for key, method, params in [
        ("msp", "msp", {}),
        ("maha", "maha", {"eps": 0.0}),
        ("maha-nudged", "maha", {"eps": 0.01}),
        ("odin-nudged", "odin", {"T": 1000.0, "eps": 0.0014}),
        ("pod", "pod", {"M": None}),
        ("mindist", "mindist", {}),
    ]:
        out[key] = cell_scores(ing.model, ing.train, id_slot, ood_slot,
                               method, **params)
    return out


def test_scores_identical_to_downstream_written_files(export_dir, tmp_path):
    # round-trip every exported file through the downstream tool's own
    # writer: the bytes must match, and so must every score computed from
    # the two directories
    for path in sorted(export_dir.iterdir()):
        fs = read_feature_file(path)
        write_feature_file(fs, tmp_path / path.name)
        assert (tmp_path / path.name).read_bytes() == path.read_bytes()
    ours = bundle_scores(export_dir)
    theirs = bundle_scores(tmp_path)
    assert ours.keys() == theirs.keys()
    for key in ours:
        for side in (0, 1):
            assert np.array_equal(ours[key][side], theirs[key][side]), key


def test_exported_features_separate_the_distributions(export_dir):
    scores = bundle_scores(export_dir)
    for key, (id_scores, ood_scores) in scores.items():
        assert np.all(np.isfinite(id_scores)), key
        assert np.all(np.isfinite(ood_scores)), key
    # the trained net separates blobs from stripes; sanity-check msp
    id_scores, ood_scores = scores["msp"]
    assert np.mean(id_scores) > np.mean(ood_scores)


def test_grid_validation():
    with pytest.raises(ValueError):
        GridEntry("odin", 5000.0, 0.01)  # T beyond the search range
    with pytest.raises(ValueError):
        GridEntry("odin", None, 0.01)
    with pytest.raises(ValueError):
        GridEntry("maha", 10.0, 0.01)
    with pytest.raises(ValueError):
        GridEntry("maha", None, 0.5)  # eps beyond the search range
    with pytest.raises(ValueError):
        GridEntry("energy", None, 0.01)
    entry = parse_grid_entry("odin,T=1000,eps=0.0014")
    assert entry == GridEntry("odin", 1000.0, 0.0014)
    assert parse_grid_entry("maha,eps=0.01") == GridEntry("maha", None, 0.01)
    with pytest.raises(ValueError):
        parse_grid_entry("odin,T=1000")  # eps missing


def test_job_rejects_unlabeled_id_splits(checkpoint, tmp_path):
    with pytest.raises(DatasetError):
        ExportJob(str(checkpoint), parse_split("stripes,seed=0,n=64"),
                  parse_split("blobs,seed=1,n=32"),
                  parse_split("stripes,seed=2,n=32"), str(tmp_path), GRID)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_cli_train_and_export(tmp_path, capsys):
    ckpt = tmp_path / "net.pt"
    code, out, _ = run_cli(capsys, "train", "--epochs", "60",
                           "--out", str(ckpt))
    assert code == 0 and ckpt.exists()
    assert "train accuracy 1.000" in out
    code, out, _ = run_cli(
        capsys, "export", "--checkpoint", str(ckpt),
        "--id-train", "blobs,seed=0,n=64",
        "--id-test", "blobs,seed=1,n=32",
        "--ood-test", "stripes,seed=2,n=32",
        "--grid", "odin,T=1000,eps=0.0014", "--grid", "maha,eps=0",
        "--out", str(tmp_path / "feats"),
    )
    assert code == 0
    assert out.count("wrote ") == 5  # 3 untagged + 2 odin variants
    assert "skipped maha eps=0 entry" in out
    files = sorted(str(p) for p in (tmp_path / "feats").iterdir())
    assert oodbench_main(["ingest-check"] + files) == 0


def test_cli_error_paths(tmp_path, capsys):
    code, _, err = run_cli(capsys, "export", "--checkpoint",
                           str(tmp_path / "missing.pt"),
                           "--id-train", "blobs,seed=0,n=64",
                           "--id-test", "blobs,seed=1,n=32",
                           "--ood-test", "stripes,seed=2,n=32",
                           "--out", str(tmp_path))
    assert code == 5 and "checkpoint" in err

    ckpt = tmp_path / "net.pt"
    images, labels = make_split(parse_split("blobs,seed=0,n=8"))
    net, _ = train_net(images, labels, epochs=1)
    save_checkpoint(net, ckpt)
    code, _, err = run_cli(capsys, "export", "--checkpoint", str(ckpt),
                           "--id-train", "stripes,seed=0,n=8",
                           "--id-test", "blobs,seed=1,n=8",
                           "--ood-test", "stripes,seed=2,n=8",
                           "--out", str(tmp_path))
    assert code == 5 and "labeled" in err

    code, _, err = run_cli(capsys, "export", "--checkpoint", str(ckpt),
                           "--id-train", "blobs,seed=0,n=8",
                           "--id-test", "blobs,seed=1,n=8",
                           "--ood-test", "stripes,seed=2,n=8",
                           "--grid", "odin,T=5000,eps=0.01",
                           "--out", str(tmp_path))
    assert code == 4 and "temperature" in err

    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_cli_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
