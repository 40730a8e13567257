import io

import numpy as np
import pytest
from scipy.io import wavfile

from conftest import CORPUS
from vibroscene.agents import VibrationDescription
from vibroscene.audio_assets import (
    AudioAsset,
    CorpusManifest,
    load_audio,
    resolve_vibration_audio,
    search_corpus,
    slugify,
)
from vibroscene.errors import DecodeError, ResolutionFailed, ValidationError


def write_wav(path, rate, samples):
    wavfile.write(path, rate, samples)
    return path


def sine(rate, freq, duration, amplitude=0.5):
    t = np.arange(int(rate * duration)) / rate
    return amplitude * np.sin(2 * np.pi * freq * t)


class TestLoadAudio:
    def test_stereo_pcm16_resampled_to_mono(self, tmp_path):
        rate = 44100
        left = sine(rate, 220, 0.5)
        right = sine(rate, 440, 0.5)
        stereo = np.stack([left, right], axis=1)
        path = write_wav(tmp_path / "a.wav", rate,
                         (stereo * 32767).astype(np.int16))
        asset = load_audio(path, target_rate=48000)
        assert asset.samples.ndim == 1
        expected_len = round(len(left) * 48000 / 44100)
        assert abs(len(asset.samples) - expected_len) <= 1
        assert asset.duration == pytest.approx(0.5, abs=1e-3)
        assert float(np.max(np.abs(asset.samples))) <= 1.0

    def test_mono_float_at_target_rate_passes_through(self, tmp_path):
        samples = sine(48000, 100, 0.25).astype(np.float32)
        path = write_wav(tmp_path / "b.wav", 48000, samples)
        asset = load_audio(path, target_rate=48000)
        assert np.array_equal(asset.samples, samples)

    def test_idempotent(self, tmp_path):
        path = write_wav(tmp_path / "c.wav", 44100,
                         (sine(44100, 300, 0.3) * 32767).astype(np.int16))
        first = load_audio(path, target_rate=48000)
        again_path = tmp_path / "c2.wav"
        wavfile.write(again_path, 48000, first.samples)
        second = load_audio(again_path, target_rate=48000)
        assert np.array_equal(first.samples, second.samples)

    def test_text_file_is_decode_error(self, tmp_path):
        path = tmp_path / "fake.wav"
        path.write_text("definitely not audio")
        with pytest.raises(DecodeError):
            load_audio(path)

    def test_loud_file_scaled_down(self, tmp_path):
        loud = (2.0 * sine(48000, 80, 0.1, amplitude=1.0)).astype(np.float32)
        path = write_wav(tmp_path / "d.wav", 48000, loud)
        asset = load_audio(path)
        assert float(np.max(np.abs(asset.samples))) <= 1.0


class TestAssetInvariants:
    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            AudioAsset(id="x", samples=np.zeros(0, np.float32),
                       sample_rate=48000, origin="corpus")

    def test_out_of_range_rejected(self):
        with pytest.raises(ValidationError):
            AudioAsset(id="x", samples=np.array([1.5], np.float32),
                       sample_rate=48000, origin="corpus")


def corpus_with(tmp_path, phrases):
    import json

    audio = tmp_path / "audio"
    audio.mkdir(exist_ok=True)
    entries = []
    for phrase in phrases:
        name = f"{slugify(phrase)}.wav"
        write_wav(audio / name, 22050,
                  (sine(22050, 150, 0.2) * 32767).astype(np.int16))
        entries.append({"keywords": phrase, "path": f"audio/{name}"})
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({"entries": entries}))
    return CorpusManifest.load(manifest)


class TestSearchCorpus:
    def test_exact_hit(self):
        corpus = CorpusManifest.load(CORPUS)
        path = search_corpus("smartphone buzz", corpus)
        assert path is not None and path.name == "smartphone_buzz.wav"

    def test_category_token_dominates_verb(self, tmp_path):
        corpus = corpus_with(tmp_path, ["drill spin", "mixer whir"])
        path = search_corpus("drill whir", corpus)
        assert path is not None and path.name == "drill_spin.wav"

    def test_verb_only_match_rejected(self, tmp_path):
        corpus = corpus_with(tmp_path, ["mixer whir"])
        assert search_corpus("drill whir", corpus) is None

    def test_no_overlap_returns_none(self, tmp_path):
        corpus = corpus_with(tmp_path, ["drill spin", "mixer whir"])
        assert search_corpus("teapot whistle", corpus) is None

    def test_tie_breaks_lexicographically(self, tmp_path):
        corpus = corpus_with(tmp_path, ["drill whine", "drill wheeze"])
        path = search_corpus("drill spin", corpus)
        assert path.name == "drill_wheeze.wav"

    def test_multiword_category(self, tmp_path):
        corpus = corpus_with(tmp_path, ["washing machine rumble", "machine shop hum"])
        path = search_corpus("washing machine shake", corpus)
        assert path.name == "washing_machine_rumble.wav"

    def test_missing_file_rejected_at_load(self, tmp_path):
        import json

        manifest = tmp_path / "manifest.json"
        manifest.write_text(json.dumps(
            {"entries": [{"keywords": "ghost sound", "path": "audio/ghost.wav"}]}
        ))
        with pytest.raises(ValidationError):
            CorpusManifest.load(manifest)


class FakeRetrieval:
    stage = "retrieval"

    def __init__(self, asset=None):
        self.asset = asset
        self.calls = []

    def retrieve(self, keywords):
        self.calls.append(keywords)
        return self.asset


class FakeGeneration:
    stage = "generation"

    def __init__(self, asset=None):
        self.asset = asset
        self.calls = []

    def generate(self, sentence):
        self.calls.append(sentence)
        return self.asset


def make_asset(origin):
    return AudioAsset(id=f"{origin}:x", samples=np.array([0.1, -0.1], np.float32),
                      sample_rate=48000, origin=origin)


DESC = VibrationDescription(free_form="Drill whirs against the wall",
                            keywords="drill whir")


class TestResolutionOrder:
    def test_corpus_hit_short_circuits(self, tmp_path):
        corpus = corpus_with(tmp_path, ["drill whir"])
        retrieval, generation = FakeRetrieval(make_asset("retrieval")), FakeGeneration()
        asset = resolve_vibration_audio(DESC, corpus, [retrieval, generation])
        assert asset.origin == "corpus"
        assert retrieval.calls == [] and generation.calls == []

    def test_retrieval_before_generation(self, tmp_path):
        corpus = corpus_with(tmp_path, ["mixer whir"])  # verb-only: corpus misses
        retrieval = FakeRetrieval(make_asset("retrieval"))
        generation = FakeGeneration(make_asset("generation"))
        asset = resolve_vibration_audio(DESC, corpus, [retrieval, generation])
        assert asset.origin == "retrieval"
        assert retrieval.calls == ["drill whir"]
        assert generation.calls == []

    def test_generation_last(self, tmp_path):
        corpus = corpus_with(tmp_path, ["mixer whir"])
        retrieval = FakeRetrieval(None)
        generation = FakeGeneration(make_asset("generation"))
        asset = resolve_vibration_audio(DESC, corpus, [retrieval, generation])
        assert asset.origin == "generation"
        assert generation.calls == ["Drill whirs against the wall"]

    def test_exhaustion(self, tmp_path):
        corpus = corpus_with(tmp_path, ["mixer whir"])
        with pytest.raises(ResolutionFailed):
            resolve_vibration_audio(DESC, corpus, [FakeRetrieval(None),
                                                   FakeGeneration(None)])

    def test_no_corpus_no_adapters(self):
        with pytest.raises(ResolutionFailed):
            resolve_vibration_audio(DESC, None, [])
