"""Exception hierarchy for the toolkit.

Every failure mode callers are expected to handle gets its own class so the
CLI and service can map them to exit codes / HTTP statuses without string
matching.
"""


class AvdError(Exception):
    """Base class for all toolkit errors."""


# --- audio_io ---

class MalformedContainer(AvdError):
    """Bytes are not a parseable RIFF/WAVE container."""


class UnsupportedCodec(AvdError):
    """WAV codec other than PCM16/PCM24/float32."""


class EmptyAudio(AvdError):
    """Decoded file contains zero frames."""


class InvalidRate(AvdError):
    """Non-positive target sample rate."""


class PayloadTooLarge(AvdError):
    """Input exceeds the configured byte limit."""


# --- features ---

class InvalidConfig(AvdError):
    """MFCC/filterbank configuration violates its invariants."""


class ChunkTooShort(AvdError):
    """Chunk has fewer samples than one analysis frame."""


class EmptyFrames(AvdError):
    """Pooling requested over zero frames."""


class ProviderUnavailable(AvdError):
    """External embedding process/endpoint is down or errored."""


class DimMismatch(AvdError):
    """Vector length disagrees with the declared dimension."""


class MissingEmbedding(AvdError):
    """Precomputed embedding file lacks the requested chunk_id."""


class CorruptFile(AvdError):
    """Embedding file failed magic/version/truncation/checksum validation."""


class DuplicateChunkId(AvdError):
    """Embedding file or manifest contains a repeated chunk id."""


# --- classifiers ---

class DegenerateData(AvdError):
    """Training set has fewer than two samples or a single class."""


class ConstantFeatures(AvdError):
    """Pooled feature variance is (numerically) zero; gamma undefined."""


# --- evaluation ---

class TooFewSamples(AvdError):
    """n < k, or fewer groups than folds."""


class TooFewPerClass(AvdError):
    """Stratified split requested with a class smaller than k."""


class ConflictingOptions(AvdError):
    """Mutually exclusive split options requested together."""


class LengthMismatch(AvdError):
    """y_true and y_pred differ in length."""


class EmptyInput(AvdError):
    """Metric requested over zero samples."""


class AlignmentError(AvdError):
    """Feature and label sets do not cover the same chunk ids."""


# --- model_store ---

class IoFailure(AvdError):
    """Artifact could not be written."""


class CorruptArtifact(AvdError):
    """Artifact failed checksum or structural validation."""


class UnsupportedVersion(AvdError):
    """Artifact format version unknown to this reader."""


class InconsistentDims(AvdError):
    """Classifier payload dimensions disagree with the provider dimension."""


# --- service ---

class EmptyChunks(AvdError):
    """Verdict aggregation over an empty label sequence."""


class AudioTooShort(AvdError):
    """Audio produced zero chunks after the remainder rule."""


class ModelUnavailable(AvdError):
    """Service artifact failed to load."""


class ManifestError(AvdError):
    """Dataset manifest is unreadable or violates its invariants."""
