"""Reading and writing complete strict-order election data (PrefLib SOC).

Only the SOC flavor is supported: every ballot must rank every alternative
exactly once.  Ties (``{...}`` groups) and incomplete ballots are rejected
with positioned errors, because every rule in this package requires strict
total orders.

Format
------
Header lines start with ``#`` and carry ``# KEY: VALUE`` metadata;
``# ALTERNATIVE NAME <i>: <label>`` declares alternative ``i``'s label.
Body lines read ``count: i1,i2,...,im`` and stand for ``count`` voters with
that ranking (indices are 1-based and must cover all alternatives).  When no
alternative is declared, the ids are inferred from the first ballot.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

from .profiles import PreferenceProfile, profile_from_indices

_ALT_NAME_KEY = re.compile(r"ALTERNATIVE NAME (\d+)")


class SocError(ValueError):
    """Parse failure with a 1-based line number (0 for document-level issues)."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SocSyntaxError(SocError):
    pass


class IncompleteRankingError(SocError):
    pass


class UnknownAlternativeError(SocError):
    pass


class TiedBallotError(SocError):
    pass


@dataclass(frozen=True)
class SocDocument:
    """Parsed election: header metadata plus the validated profile."""

    metadata: tuple[tuple[str, str], ...]
    profile: PreferenceProfile

    def metadata_dict(self) -> dict[str, str]:
        return dict(self.metadata)


def parse_soc(text: str) -> SocDocument:
    """Parse SOC text into a document; raises positioned :class:`SocError`."""
    metadata: list[tuple[str, str]] = []
    labels: dict[int, str] = {}
    ballots: list[tuple[int, int, tuple[int, ...]]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            content = line[1:].strip()
            key, sep, value = content.partition(":")
            if not sep or not key.strip():
                raise SocSyntaxError(lineno, "expected '# KEY: VALUE'")
            key, value = key.strip(), value.strip()
            named = _ALT_NAME_KEY.fullmatch(key)
            if named:
                labels[int(named.group(1))] = value
            else:
                metadata.append((key, value))
            continue
        if "{" in line or "}" in line:
            raise TiedBallotError(lineno, "tied groups are not allowed in SOC data")
        count_text, sep, ranking_text = line.partition(":")
        if not sep:
            raise SocSyntaxError(lineno, "expected 'count: i1,i2,...'")
        try:
            count = int(count_text.strip())
        except ValueError:
            raise SocSyntaxError(lineno, f"bad multiplicity {count_text.strip()!r}") from None
        if count < 1:
            raise SocSyntaxError(lineno, f"multiplicity must be positive, got {count}")
        ids = []
        for token in ranking_text.split(","):
            token = token.strip()
            try:
                ids.append(int(token))
            except ValueError:
                raise SocSyntaxError(lineno, f"bad alternative id {token!r}") from None
        ballots.append((lineno, count, tuple(ids)))

    if not ballots:
        raise SocSyntaxError(0, "document contains no ballots")

    known = sorted(labels) if labels else sorted(set(ballots[0][2]))
    index = {alt_id: i for i, alt_id in enumerate(known)}
    rankings: list[tuple[int, ...]] = []
    for lineno, count, ids in ballots:
        for alt_id in ids:
            if alt_id not in index:
                raise UnknownAlternativeError(lineno, f"undeclared alternative {alt_id}")
        if len(ids) != len(known) or len(set(ids)) != len(ids):
            raise IncompleteRankingError(
                lineno, "ballot must rank every alternative exactly once"
            )
        rankings.extend([tuple(index[alt_id] for alt_id in ids)] * count)

    names = tuple(labels.get(alt_id, str(alt_id)) for alt_id in known)
    return SocDocument(
        metadata=tuple(metadata),
        profile=profile_from_indices(rankings, names=names),
    )


def write_soc(doc: SocDocument) -> str:
    """Canonical, byte-deterministic SOC text for a document.

    Metadata keys are emitted in sorted order, alternatives as 1-based ids in
    profile order, and identical rankings are merged with multiplicities and
    sorted lexicographically.
    """
    profile = doc.profile
    lines = [f"# {key}: {value}" for key, value in sorted(doc.metadata)]
    for i, name in enumerate(profile.alternatives, start=1):
        lines.append(f"# ALTERNATIVE NAME {i}: {name}")
    counted = Counter(profile.rankings)
    for ranking in sorted(counted):
        ids = ",".join(str(x + 1) for x in ranking)
        lines.append(f"{counted[ranking]}: {ids}")
    return "\n".join(lines) + "\n"
