import json
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from conftest import img
from gknn.corpus import (CorpusSpec, EvaluationReport, GlyphTemplate, Sample, SweepTable,
                         builtin_templates, evaluate, generate_corpus, k_sweep, read_manifest,
                         rescale, split, train, worker_count, write_corpus)
from gknn.corpus.generate import sample_filename
from gknn.imaging import BinaryImage, morphological_open

SMALL = CorpusSpec(styles=5, sizes=(16, 24), samples_per_class=12, rng_seed=7)


@pytest.fixture(scope="module")
def small_corpus():
    return generate_corpus(SMALL)


# -- templates -----------------------------------------------------------------

def test_builtin_templates_cover_digits():
    ts = builtin_templates()
    assert sorted(t.label for t in ts) == list(range(10))
    assert all(t.mask.shape == (32, 32) and t.mask.count() > 0 for t in ts)
    masks = {t.mask for t in ts}
    assert len(masks) == 10


def test_template_rejects_empty_mask():
    with pytest.raises(ValueError):
        GlyphTemplate(3, BinaryImage.blank(32, 32))


# -- rescale ---------------------------------------------------------------------

def test_rescale_identity():
    for t in builtin_templates():
        assert rescale(t.mask, 32) == t.mask


def test_rescale_checkerboard_blocks():
    out = rescale(img("10/01"), 4)
    assert out.to_rows() == ["1100", "1100", "0011", "0011"]


@given(hnp.arrays(dtype=bool, shape=st.tuples(st.integers(1, 12), st.integers(1, 12))),
       st.integers(1, 4))
def test_rescale_integer_factor_is_block_replication(pixels, s):
    h = pixels.shape[0]
    out = rescale(BinaryImage(pixels), s * h)
    assert out.pixels.tolist() == np.kron(pixels, np.ones((s, s), dtype=bool)).tolist()


@given(st.integers(1, 64), st.integers(1, 64), st.integers(1, 80))
def test_rescale_dimension_contract(h, w, target):
    out = rescale(BinaryImage.blank(w, h), target)
    assert out.height == target
    assert out.width == max(1, int(w * target / h + 0.5))


def test_rescale_rejects_zero_height():
    with pytest.raises(ValueError):
        rescale(img("1"), 0)


# -- generation -----------------------------------------------------------------

def test_one_sample_per_digit_and_size():
    corpus = generate_corpus(CorpusSpec(styles=5, sizes=(16, 50), samples_per_class=35))
    assert len(corpus) == 350
    for label in range(10):
        sizes = sorted(s.size for s in corpus if s.label == label)
        assert sizes == list(range(16, 51))
    assert all(s.image.height == s.size + 4 for s in corpus)


def test_generation_deterministic(small_corpus):
    again = generate_corpus(SMALL)
    assert [s.image for s in again] == [s.image for s in small_corpus]
    assert [s.meta for s in again] == [s.meta for s in small_corpus]
    other = generate_corpus(CorpusSpec(styles=5, sizes=(16, 24), samples_per_class=12, rng_seed=8))
    assert [s.image for s in other] != [s.image for s in small_corpus]


def test_every_sample_survives_opening(small_corpus):
    assert all(morphological_open(s.image).count() > 0 for s in small_corpus)


def test_styles_differ():
    corpus = generate_corpus(CorpusSpec(styles=9, sizes=(32, 32), samples_per_class=9))
    zeros = [s.image for s in corpus if s.label == 0]
    assert len(set(zeros)) == 9


def test_noise_is_removed_by_opening():
    clean = generate_corpus(CorpusSpec(styles=5, sizes=(40, 40), samples_per_class=5))
    noisy = generate_corpus(CorpusSpec(styles=5, sizes=(40, 40), samples_per_class=5, noise=0.005))
    assert any(a.image != b.image for a, b in zip(clean, noisy))


def test_missing_digit_rejected():
    ts = [t for t in builtin_templates() if t.label != 4]
    with pytest.raises(ValueError, match="4"):
        generate_corpus(SMALL, ts)


@pytest.mark.parametrize("kwargs", [
    {"sizes": (7, 20)}, {"sizes": (30, 20)}, {"styles": 4}, {"samples_per_class": 0},
    {"noise": 0.01},
])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        CorpusSpec(**kwargs)


# -- split ------------------------------------------------------------------------

def test_split_arithmetic():
    corpus = generate_corpus(CorpusSpec(styles=5, sizes=(16, 20), samples_per_class=115))
    tr, te = split(corpus, 50, seed=1)
    for label in range(10):
        assert sum(s.label == label for s in tr) == 50
        assert sum(s.label == label for s in te) == 65
    assert not {id(s) for s in tr} & {id(s) for s in te}
    assert len(tr) + len(te) == len(corpus)


def test_split_deterministic_and_nested(small_corpus):
    a, _ = split(small_corpus, 5, seed=3)
    b, _ = split(small_corpus, 5, seed=3)
    assert [id(s) for s in a] == [id(s) for s in b]
    bigger, _ = split(small_corpus, 8, seed=3)
    assert {id(s) for s in a} <= {id(s) for s in bigger}


def test_split_insufficient_samples(small_corpus):
    with pytest.raises(ValueError):
        split(small_corpus, 12)


# -- evaluation ------------------------------------------------------------------------

def test_evaluate_on_training_set_is_perfect(small_corpus):
    model = train(small_corpus)
    report = evaluate(model, small_corpus, k=1)
    assert report.overall_accuracy == 100.0
    assert report.rejected == []


def test_report_bookkeeping(small_corpus):
    tr, te = split(small_corpus, 4, seed=0)
    report = evaluate(train(tr), te, k=3)
    assert report.tested.tolist() == [8] * 10
    assert report.confusion.sum(axis=1).tolist() == report.tested.tolist()
    ratio = 100.0 * report.correct.sum() / report.tested.sum()
    assert abs(ratio - report.overall_accuracy) <= 1e-12
    assert all(0 <= a <= 100 for a in report.per_class_accuracy)
    assert report.timed_images == len(te)
    assert report.mean_time_per_image > 0


def test_report_text_layout():
    confusion = np.diag([115] * 10)
    text = EvaluationReport(confusion).to_text()
    lines = text.splitlines()
    assert len(lines) == 12
    assert lines[0].split() == ["Numeral", "Test", "images", "Correctly", "classified", "%",
                                "Accuracy"]
    for c, line in enumerate(lines[1:11]):
        assert line.split() == [str(c), "115", "115", "100.00"]
    assert lines[11].split() == ["Total", "1150", "1150", "100.00"]


def test_blank_test_image_is_rejected(small_corpus):
    model = train(small_corpus[:30])
    test = [small_corpus[0], Sample(BinaryImage.blank(20, 20), 3)]
    report = evaluate(model, test)
    assert report.rejected == [1]
    assert int(report.tested.sum()) == 1
    assert json.loads(report.to_json())["rejected"] == [1]


def test_parallel_matches_serial(small_corpus):
    tr, te = split(small_corpus, 4, seed=2)
    model = train(tr)
    a = evaluate(model, te, 1, workers=1)
    b = evaluate(model, te, 1, workers=4)
    assert a.to_json() == b.to_json()


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("GKNN_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("GKNN_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.setenv("GKNN_THREADS", "many")
    with pytest.raises(ValueError):
        worker_count()


def test_evaluate_empty_test_set(small_corpus):
    with pytest.raises(ValueError):
        evaluate(train(small_corpus[:5]), [])


# -- sweep ------------------------------------------------------------------------------

def test_sweep_shape_and_determinism(small_corpus):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = k_sweep(small_corpus, (1, 3, 5, 7), (8, 5), seed=1)
        b = k_sweep(small_corpus, (1, 3, 5, 7), (8, 5), seed=1)
    assert len(a.cells) == 8
    assert all(0 <= v <= 100 for v in a.cells.values())
    assert a.test_count == 40
    assert a.to_csv() == b.to_csv()
    assert a.to_json() == b.to_json()
    rows = a.to_csv().splitlines()
    assert rows[0] == "k,train_size,accuracy"
    assert len(rows) == 9
    assert len(a.to_text().splitlines()) == 6


def test_sweep_trend_warning():
    t = SweepTable((1, 7), (50,), {(1, 50): 97.0, (7, 50): 98.0}, 650)
    assert len(t.trend_warnings()) == 1
    t = SweepTable((1, 7), (50,), {(1, 50): 99.0, (7, 50): 98.0}, 650)
    assert t.trend_warnings() == []


# -- disk layout -------------------------------------------------------------------------

def test_manifest_round_trip(tmp_path, small_corpus):
    subset = small_corpus[::7]
    manifest = write_corpus(subset, tmp_path)
    header = manifest.read_text().splitlines()[0]
    assert header == "path,label,style,size"
    back = read_manifest(manifest)
    assert [s.image for s in back] == [s.image for s in subset]
    assert [s.label for s in back] == [s.label for s in subset]
    assert [(s.style, s.size) for s in back] == [(s.style, s.size) for s in subset]
    assert read_manifest(tmp_path)[0].image == subset[0].image


def test_sample_filename(small_corpus):
    s = small_corpus[0]
    assert sample_filename(s) == f"0_{s.style}_{s.size}_0.pbm"
