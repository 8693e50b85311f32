"""Reference model server for the phrase-attack wire protocol.

Serves a victim classifier, a blank-infilling seq2seq model, a
label-conditioned masked LM, a constituency parser, and an optional
perplexity scorer behind the JSON/HTTP protocol the attack engine speaks.
All models are word-level and can be trained from scratch on small
corpora (see ``toy.py``); the fine-tuning recipes keep their
reference hyperparameters as defaults.
"""

__version__ = "0.1.0"
