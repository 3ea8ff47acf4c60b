from decodelab.nn.embed import embed_batch, embed_syndrome, model_inputs
from decodelab.nn.layers import Conv2D, Dense, Flatten, ReLU, softmax
from decodelab.nn.model import (
    Model,
    ModelSpec,
    build_model,
    forward,
    loss_and_gradients,
    predict_label,
    predict_labels,
)
from decodelab.nn.optim import AmsGrad, amsgrad_step
from decodelab.nn.serialize import load_model, save_model
from decodelab.nn.train import EpochStats, TrainConfig, TrainLog, train

__all__ = [
    "AmsGrad",
    "Conv2D",
    "Dense",
    "EpochStats",
    "Flatten",
    "Model",
    "ModelSpec",
    "ReLU",
    "TrainConfig",
    "TrainLog",
    "amsgrad_step",
    "build_model",
    "embed_batch",
    "embed_syndrome",
    "forward",
    "load_model",
    "loss_and_gradients",
    "model_inputs",
    "predict_label",
    "predict_labels",
    "save_model",
    "softmax",
    "train",
]
