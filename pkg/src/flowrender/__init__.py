"""Conditional flow-matching mel renderer with speaker and emotion guidance."""

from .duration import DurationPredictor, UnitSequence
from .errors import (ConfigError, ContractError, DivergenceError, DomainError, EmptyInputError,
                     FlowRenderError, FormatError, ShapeError, VocabularyError)
from .field import FieldNet
from .flow_path import FlowState, PathConfig, phi_ot, target_field
from .guidance import ConditioningBundle, EmotionTrack, Projection, SpeakerEmbedding, SpeakerSource
from .model import RenderModel
from .numerics import Rng
from .sampler import SampleConfig, integrate, synthesize
from .trainer import TrainConfig, train_cfm, train_duration

__version__ = "0.1.0"
