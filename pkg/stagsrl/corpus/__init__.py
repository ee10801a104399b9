# CoNLL-2009 corpora, dependency trees, embeddings and synthetic treebanks
