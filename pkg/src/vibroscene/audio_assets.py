"""Audio asset resolution: local corpus first, then retrieval, then generation.

Assets are mono float32 in [-1, 1]. The corpus is a keyword-indexed manifest
of WAV files; external retrieval/generation run behind adapter interfaces so
tests and offline use never leave the machine.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .agents import InferredScene, VibrationDescription
from .errors import (
    DecodeError,
    ResolutionFailed,
    UnsupportedFormat,
    ValidationError,
)


@dataclass
class AudioAsset:
    id: str
    samples: np.ndarray          # mono float32
    sample_rate: int
    origin: str                  # corpus | retrieval | generation
    source_keywords: str | None = None
    source_sentence: str | None = None

    def __post_init__(self):
        if len(self.samples) == 0:
            raise ValidationError("audio asset must contain samples")
        if self.sample_rate <= 0:
            raise ValidationError(f"sample rate must be > 0, got {self.sample_rate}")
        peak = float(np.max(np.abs(self.samples))) if len(self.samples) else 0.0
        if peak > 1.0 + 1e-6:
            raise ValidationError(f"samples must lie in [-1, 1], peak {peak}")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def _normalize_tokens(text: str) -> list[str]:
    return [t for t in re.sub(r"[^a-z0-9\s]+", " ", text.lower()).split() if t]


def slugify(text: str) -> str:
    return "_".join(_normalize_tokens(text))


# ---------------------------------------------------------------------------
# WAV decode / encode

def decode_wav(data: bytes) -> tuple[int, np.ndarray]:
    """Decode WAV bytes to (rate, float64 samples), any channel layout."""
    from scipy.io import wavfile

    try:
        rate, raw = wavfile.read(io.BytesIO(data))
    except Exception as exc:
        raise DecodeError(f"not a decodable WAV file: {exc}") from exc
    if raw.dtype == np.int16:
        samples = raw.astype(np.float64) / 32768.0
    elif raw.dtype == np.int32:
        samples = raw.astype(np.float64) / 2147483648.0
    elif raw.dtype == np.uint8:
        samples = (raw.astype(np.float64) - 128.0) / 128.0
    elif raw.dtype in (np.float32, np.float64):
        samples = raw.astype(np.float64)
    else:
        raise UnsupportedFormat(f"unsupported WAV sample format {raw.dtype}")
    return int(rate), samples


def encode_wav_float32(samples: np.ndarray, sample_rate: int) -> bytes:
    """RIFF/WAVE, IEEE float 32-bit, mono."""
    from scipy.io import wavfile

    buf = io.BytesIO()
    wavfile.write(buf, sample_rate, np.asarray(samples, dtype=np.float32))
    return buf.getvalue()


def resample_linear(samples: np.ndarray, src_rate: int, dst_rate: int) -> np.ndarray:
    """Duration-preserving linear-interpolation resample."""
    if src_rate == dst_rate:
        return samples
    n = len(samples)
    out_n = max(1, round(n * dst_rate / src_rate))
    positions = np.arange(out_n, dtype=np.float64) * src_rate / dst_rate
    return np.interp(positions, np.arange(n, dtype=np.float64), samples)


def load_audio(path: str | Path, target_rate: int = 48_000,
               asset_id: str | None = None, origin: str = "corpus") -> AudioAsset:
    """Decode a WAV file to a mono asset at target_rate.

    Multichannel input is downmixed by channel averaging; peaks above 1.0
    are scaled down (quieter files pass through untouched).
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise DecodeError(f"cannot read {path}: {exc}") from exc
    rate, samples = decode_wav(data)
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    elif samples.ndim != 1:
        raise UnsupportedFormat(f"unsupported channel layout {samples.shape}")
    if len(samples) == 0:
        raise DecodeError(f"{path} contains no samples")
    samples = resample_linear(samples, rate, target_rate)
    peak = float(np.max(np.abs(samples)))
    if peak > 1.0:
        samples = samples / peak
    return AudioAsset(
        id=asset_id or f"{origin}:{slugify(path.stem)}",
        samples=samples.astype(np.float32),
        sample_rate=target_rate,
        origin=origin,
    )


# ---------------------------------------------------------------------------
# corpus

@dataclass(frozen=True)
class CorpusEntry:
    keywords: str
    path: Path


@dataclass
class CorpusManifest:
    entries: list[CorpusEntry]

    @classmethod
    def load(cls, manifest_path: str | Path) -> "CorpusManifest":
        import json

        manifest_path = Path(manifest_path)
        doc = json.loads(manifest_path.read_text("utf-8"))
        entries = []
        for raw in doc.get("entries", []):
            keywords = raw["keywords"]
            if not keywords.strip():
                raise ValidationError("corpus entry with empty keywords")
            path = (manifest_path.parent / raw["path"]).resolve()
            if not path.is_file():
                raise ValidationError(f"corpus audio file missing: {path}")
            entries.append(CorpusEntry(keywords=keywords, path=path))
        return cls(entries=entries)


def search_corpus(keywords: str, corpus: CorpusManifest) -> Path | None:
    """Best token-overlap entry for the 'category... verb' keyword phrase.

    Category tokens (all but the last) score double the verb token, and an
    entry qualifies only if at least one category token matches: category
    identity matters more than verb synonymy. Ties resolve to the
    lexicographically smallest entry keyword string.
    """
    query = _normalize_tokens(keywords)
    if not query:
        return None
    category = set(query[:-1]) if len(query) > 1 else set(query)
    verb = query[-1] if len(query) > 1 else None
    best: tuple[int, str] | None = None
    best_path: Path | None = None
    for entry in corpus.entries:
        tokens = set(_normalize_tokens(entry.keywords))
        category_hits = len(category & tokens)
        if category_hits == 0:
            continue
        score = 2 * category_hits + (1 if verb in tokens else 0)
        key = (-score, entry.keywords)
        if best is None or key < best:
            best = key
            best_path = entry.path
    return best_path


# ---------------------------------------------------------------------------
# adapters

class DirectoryRetrievalAdapter:
    """Fixture-backed retrieval: keyword slug names a WAV file in a directory."""

    stage = "retrieval"

    def __init__(self, root: str | Path, target_rate: int = 48_000):
        self.root = Path(root)
        self.target_rate = target_rate
        self.calls: list[str] = []

    def retrieve(self, keywords: str) -> AudioAsset | None:
        self.calls.append(keywords)
        path = self.root / f"{slugify(keywords)}.wav"
        if not path.is_file():
            return None
        asset = load_audio(path, self.target_rate, origin="retrieval",
                           asset_id=f"retrieval:{slugify(keywords)}")
        asset.source_keywords = keywords
        return asset


class DirectoryGenerationAdapter:
    """Fixture-backed generation: sentence slug names a WAV file in a directory."""

    stage = "generation"

    def __init__(self, root: str | Path, target_rate: int = 48_000):
        self.root = Path(root)
        self.target_rate = target_rate
        self.calls: list[str] = []

    def generate(self, sentence: str) -> AudioAsset | None:
        self.calls.append(sentence)
        path = self.root / f"{slugify(sentence)}.wav"
        if not path.is_file():
            return None
        asset = load_audio(path, self.target_rate, origin="generation",
                           asset_id=f"generation:{slugify(sentence)}")
        asset.source_sentence = sentence
        return asset


def adapters_from_env() -> list:
    import os

    adapters = []
    retrieval_dir = os.environ.get("VIBROSCENE_RETRIEVAL_DIR")
    if retrieval_dir:
        adapters.append(DirectoryRetrievalAdapter(retrieval_dir))
    generation_dir = os.environ.get("VIBROSCENE_GENERATION_DIR")
    if generation_dir:
        adapters.append(DirectoryGenerationAdapter(generation_dir))
    return adapters


# ---------------------------------------------------------------------------
# resolution

def resolve_vibration_audio(desc: VibrationDescription, corpus: CorpusManifest | None,
                            adapters: list = (), target_rate: int = 48_000) -> AudioAsset:
    """Corpus, then retrieval adapters, then generation adapters; first hit wins."""
    if corpus is not None:
        path = search_corpus(desc.keywords, corpus)
        if path is not None:
            asset = load_audio(path, target_rate, origin="corpus",
                               asset_id=f"corpus:{slugify(path.stem)}")
            asset.source_keywords = desc.keywords
            return asset
    for adapter in adapters:
        if getattr(adapter, "stage", None) == "retrieval":
            asset = adapter.retrieve(desc.keywords)
            if asset is not None:
                return asset
    for adapter in adapters:
        if getattr(adapter, "stage", None) == "generation":
            asset = adapter.generate(desc.free_form)
            if asset is not None:
                return asset
    raise ResolutionFailed(
        f"no audio found for keywords {desc.keywords!r} in corpus, retrieval, or generation"
    )


def resolve_scene_audio(inferred: InferredScene, corpus: CorpusManifest | None,
                        adapters: list = (), target_rate: int = 48_000) -> dict[str, AudioAsset]:
    """Resolve every vibrating object's audio; fills audio_asset_id in place.

    Returns the id -> asset store the renderer plays from.
    """
    store: dict[str, AudioAsset] = {}
    for oid, obj in inferred.objects.items():
        if obj.vibration is None:
            obj.audio_asset_id = None
            continue
        try:
            asset = resolve_vibration_audio(obj.vibration, corpus, adapters, target_rate)
        except ResolutionFailed as exc:
            exc.object_id = oid
            raise
        obj.audio_asset_id = asset.id
        store[asset.id] = asset
    return store
