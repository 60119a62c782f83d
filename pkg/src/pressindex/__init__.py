"""pressindex: parallel news crawling, indexing, ranked retrieval and
summarization behind an XML HTTP gateway."""

__version__ = "0.1.0"
