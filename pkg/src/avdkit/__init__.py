"""Audio violence detection toolkit.

Decode and chunk WAV audio, extract MFCC or pre-trained-model embeddings,
train random forest / SVM classifiers, evaluate with stratified 5-fold
cross-validation, and serve predictions over HTTP.
"""

from .audio_io import AudioBuffer, Chunk, chunk_audio, decode_wav, encode_wav_pcm16, resample
from .evaluation import (
    ClassifierSpec,
    CvReport,
    FoldAssignment,
    Metrics,
    compute_metrics,
    cross_validate,
    kfold_split,
    render_report,
)
from .forest import Prediction, RandomForestModel, RfConfig, rf_predict, rf_train
from .mfcc import MfccConfig, compute_mfcc_frames, mel_filterbank, pool_frames
from .model_store import PipelineArtifact, load_pipeline, save_pipeline
from .pipeline import Predictor, aggregate_verdict
from .providers import (
    FeatureVector,
    MfccProvider,
    MockProvider,
    PrecomputedProvider,
    ProviderDescriptor,
    embed,
    make_provider,
)
from .embedding_file import read_embedding_file, write_embedding_file
from .svm import SvmConfig, SvmModel, resolve_gamma, svm_predict, svm_train

__version__ = "0.1.0"
