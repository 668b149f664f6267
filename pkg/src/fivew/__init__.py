"""5W question-answer fact verification toolkit.

Library + CLI for building claim corpora, filtering paraphrases, mapping
semantic roles to question words, generating question-answer pairs, and
validating claims against evidence with per-aspect verdicts.
"""

__version__ = "0.1.0"
