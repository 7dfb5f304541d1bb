"""From-scratch neural substrate: GRU stacks, batch norm, MLP head, Adam."""
from .checkpoint import load_checkpoint, save_checkpoint, sha256_file
from .core import Parameter, sigmoid
from .gradcheck import gradcheck_model
from .layers import BatchNorm, BiGruLayer, Dense, GruDirection, gru_cell_forward
from .losses import LOSSES, bce_loss, mse_loss
from .models import BiGruModel, MlpHead
from .optim import Adam

__all__ = [
    "Adam",
    "BatchNorm",
    "BiGruLayer",
    "BiGruModel",
    "Dense",
    "GruDirection",
    "LOSSES",
    "MlpHead",
    "Parameter",
    "bce_loss",
    "gradcheck_model",
    "gru_cell_forward",
    "load_checkpoint",
    "mse_loss",
    "save_checkpoint",
    "sha256_file",
    "sigmoid",
]
