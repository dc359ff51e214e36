"""Help-desk question answering engine.

Subsystems: durable knowledge store, document/transcript/incident ingestion,
QA-pair generation, tf-idf search, linear question classification, concept
disambiguation, screenshot preprocessing, dialog orchestration with human
hand-off, and feedback harvesting. The ``gateway`` module exposes everything
over HTTP; the ``cli`` module drives batch jobs.
"""

__version__ = "0.1.0"
