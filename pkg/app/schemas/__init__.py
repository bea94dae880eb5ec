from .maps import Dimensions, GrayMap, BinaryMap, PixelMatrix, MatrixKind
from .measures import ConfusionCounts, MeasureOutcome
from .ranking import RankedItem, RankingList, RetrievalDump
from .meta import CandidateSet, HumanRankedTriple, MetaResult, MetaMeasure, TrivialMapSource
from .run import RunConfig, ThresholdMode, OutputFormat, ScoreRecord, PairFailure

__all__ = [
    "Dimensions", "GrayMap", "BinaryMap", "PixelMatrix", "MatrixKind",
    "ConfusionCounts", "MeasureOutcome",
    "RankedItem", "RankingList", "RetrievalDump",
    "CandidateSet", "HumanRankedTriple", "MetaResult", "MetaMeasure", "TrivialMapSource",
    "RunConfig", "ThresholdMode", "OutputFormat", "ScoreRecord", "PairFailure",
]
