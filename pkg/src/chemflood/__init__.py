"""Chemical-flood conservation-law toolkit."""
