from .bench import SuiteTiming, timed_decode_suite
from .greedy import MAX_WINDOW_FRAMES, DecodeOptions, DecodeResult, biasing_decode, greedy_decode, lid_predict
from .longform import FRAMES_PER_S, WINDOW_S, LongFormState, iteration_cap, long_form_decode, window_at
from .stub import ScriptedModel, script_from_text

__all__ = [
    "FRAMES_PER_S",
    "MAX_WINDOW_FRAMES",
    "WINDOW_S",
    "DecodeOptions",
    "DecodeResult",
    "LongFormState",
    "ScriptedModel",
    "SuiteTiming",
    "biasing_decode",
    "greedy_decode",
    "iteration_cap",
    "lid_predict",
    "long_form_decode",
    "script_from_text",
    "timed_decode_suite",
    "window_at",
]
