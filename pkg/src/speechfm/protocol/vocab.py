"""Character-level vocabulary with multitask special tokens.

Ids are assigned in a fixed order: text characters, control tokens,
language tokens, task tokens, timestamp tokens. Language and timestamp
tokens therefore each occupy one contiguous id range.
"""

from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass, field

TIMESTAMP_STEP_S = 0.02
MAX_TIMESTAMP_S = 30.0
N_TIMESTAMPS = round(MAX_TIMESTAMP_S / TIMESTAMP_STEP_S) + 1

DEFAULT_CHARSET = " " + string.ascii_lowercase + string.ascii_uppercase + string.digits + "'.,?!-:;"
DEFAULT_LANGUAGES = ("eng", "deu", "fra", "spa", "jpn", "zho")
DEFAULT_ST_TARGETS = ("eng", "deu", "zho")

SOS, EOS, SOP, NOTIMESTAMPS = "<sos>", "<eos>", "<sop>", "<notimestamps>"
CONTROL_TOKENS = (SOS, EOS, SOP, NOTIMESTAMPS)

# codes folded into another code when data is prepared
MERGED_LANGUAGE_CODES = {"cmn": "zho"}

_CODE_RE = re.compile(r"^[a-z]{3}$")


class VocabularyError(ValueError):
    pass


def timestamp_token(seconds: float) -> str:
    return f"<t{seconds:.2f}>"


def task_token(task: str) -> str:
    return f"<{task}>"


def language_token(code: str) -> str:
    return f"<{code}>"


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple[str, ...]
    roles: tuple[str, ...]
    languages: tuple[str, ...]
    tasks: tuple[str, ...]
    charset: str
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index: dict[tuple[str, str], int] = {}
        for i, (tok, role) in enumerate(zip(self.tokens, self.roles)):
            index[(role, tok)] = i
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.tokens)

    # ids ------------------------------------------------------------------
    def char_id(self, ch: str) -> int:
        try:
            return self._index[("text", ch)]
        except KeyError:
            raise VocabularyError(f"character {ch!r} is not in the vocabulary") from None

    def special(self, name: str) -> int:
        return self._index[("control", name)]

    @property
    def sos(self) -> int:
        return self.special(SOS)

    @property
    def eos(self) -> int:
        return self.special(EOS)

    @property
    def sop(self) -> int:
        return self.special(SOP)

    @property
    def notimestamps(self) -> int:
        return self.special(NOTIMESTAMPS)

    def lang_id(self, code: str) -> int:
        try:
            return self._index[("language", language_token(code))]
        except KeyError:
            raise VocabularyError(f"language {code!r} is not in the vocabulary") from None

    def task_id(self, task: str) -> int:
        try:
            return self._index[("task", task_token(task))]
        except KeyError:
            raise VocabularyError(f"task {task!r} is not in the vocabulary") from None

    @property
    def language_range(self) -> range:
        start = self.lang_id(self.languages[0])
        return range(start, start + len(self.languages))

    @property
    def timestamp_range(self) -> range:
        start = self._index[("timestamp", timestamp_token(0.0))]
        return range(start, start + N_TIMESTAMPS)

    def timestamp_id(self, seconds: float) -> int:
        if seconds < 0 or seconds > MAX_TIMESTAMP_S + 1e-9:
            raise VocabularyError(f"timestamp {seconds} s outside [0, {MAX_TIMESTAMP_S}]")
        step = int(seconds / TIMESTAMP_STEP_S + 0.5)
        return self.timestamp_range.start + min(step, N_TIMESTAMPS - 1)

    def is_timestamp(self, tok: int) -> bool:
        return tok in self.timestamp_range

    def timestamp_seconds(self, tok: int) -> float:
        return round((tok - self.timestamp_range.start) * TIMESTAMP_STEP_S, 2)

    def is_text(self, tok: int) -> bool:
        return 0 <= tok < len(self.charset)

    def role(self, tok: int) -> str:
        return self.roles[tok]

    def code_of(self, tok: int) -> str:
        if self.roles[tok] != "language":
            raise VocabularyError(f"token {tok} is not a language token")
        return self.tokens[tok][1:-1]

    def task_of(self, tok: int) -> str:
        if self.roles[tok] != "task":
            raise VocabularyError(f"token {tok} is not a task token")
        return self.tokens[tok][1:-1]

    def text_ids(self, text: str) -> list[int]:
        missing = sorted({ch for ch in text if ("text", ch) not in self._index})
        if missing:
            raise VocabularyError(f"characters not in vocabulary: {missing!r}")
        return [self._index[("text", ch)] for ch in text]

    def detokenize(self, ids) -> str:
        """Concatenate the text tokens in ``ids``, skipping every special token."""
        n = len(self.charset)
        return "".join(self.tokens[i] for i in ids if 0 <= i < n)

    # serialization ---------------------------------------------------------
    def to_json(self) -> str:
        doc = {
            "charset": self.charset,
            "languages": list(self.languages),
            "tasks": list(self.tasks),
            "tokens": [{"id": i, "token": t, "role": r} for i, (t, r) in enumerate(zip(self.tokens, self.roles))],
        }
        return json.dumps(doc, ensure_ascii=False, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "Vocabulary":
        doc = json.loads(text)
        entries = sorted(doc["tokens"], key=lambda e: e["id"])
        if [e["id"] for e in entries] != list(range(len(entries))):
            raise VocabularyError("vocabulary ids must be dense and start at 0")
        return cls(
            tokens=tuple(e["token"] for e in entries),
            roles=tuple(e["role"] for e in entries),
            languages=tuple(doc["languages"]),
            tasks=tuple(doc["tasks"]),
            charset=doc["charset"],
        )


def _check_codes(codes, what: str) -> None:
    seen = set()
    for code in codes:
        if code in MERGED_LANGUAGE_CODES:
            raise VocabularyError(
                f"{what} code {code!r} is merged into {MERGED_LANGUAGE_CODES[code]!r}; use that instead"
            )
        if not _CODE_RE.match(code):
            raise VocabularyError(f"{what} code {code!r} is not a lowercase ISO-639-3 code")
        if code in seen:
            raise VocabularyError(f"duplicate {what} code {code!r}")
        seen.add(code)


def build_vocabulary(
    languages=DEFAULT_LANGUAGES,
    st_targets=DEFAULT_ST_TARGETS,
    charset: str = DEFAULT_CHARSET,
) -> Vocabulary:
    languages, st_targets = tuple(languages), tuple(st_targets)
    if not languages:
        raise VocabularyError("at least one language is required")
    _check_codes(languages, "language")
    _check_codes(st_targets, "translation target")
    if len(set(charset)) != len(charset):
        raise VocabularyError("charset contains duplicate characters")

    tokens: list[str] = []
    roles: list[str] = []

    def add(tok, role):
        tokens.append(tok)
        roles.append(role)

    for ch in charset:
        add(ch, "text")
    for tok in CONTROL_TOKENS:
        add(tok, "control")
    for code in languages:
        add(language_token(code), "language")
    tasks = ("asr",) + tuple(f"st_{c}" for c in st_targets)
    for t in tasks:
        add(task_token(t), "task")
    for i in range(N_TIMESTAMPS):
        add(timestamp_token(i * TIMESTAMP_STEP_S), "timestamp")
    return Vocabulary(tuple(tokens), tuple(roles), languages, tasks, charset)
