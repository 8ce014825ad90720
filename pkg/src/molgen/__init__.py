"""Property-conditioned molecule generation with a sequence CVAE.

Subpackages:
    chem        SMILES tokenizer, parser, validity and canonicalization
    descriptors molecular weight, LogP, HBD, HBA, TPSA
    codec       vocabulary, index sequences, condition vectors
    numcore     dense tensors with reverse-mode gradients, LSTM, Adam
    cvae        the conditional VAE model, training loop, checkpoints
    generate    latent sampling, stochastic write-out, campaigns
    evaluate    success criterion, rates, histograms, PCA
    dataset     corpus ingestion, split, caching
"""

__version__ = "0.1.0"
