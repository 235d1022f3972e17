from .backends import Backend, ClassifierBackend, DetectorBackend
from .calibration import Calibration, calibrate_box, rotate_box
from .detect import ColorClass, Detection, DetectorConfig, DetectorConfigError, box_blur3, detect
from .model import (
    ClassifierModel,
    ModelFormatError,
    Recognition,
    TruncatedModelError,
    class_scores,
    classify,
    color_histogram,
    featurize,
    fit_classifier,
    load_model,
    read_model,
    save_model,
    softmax,
    top_k,
    write_model,
)
