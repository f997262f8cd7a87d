"""Moment-wise embedding of an Erdos-Renyi graph with Gaussian weights.

For each k the aligned first coordinate of the ASE of W^(k) should sit
near sqrt(p * E[w^k]); its spread over nodes, times N, should match the
asymptotic variance of the first moment embedding.

    python3 demos/er_embedding.py [--N 1000] [--seed 1]
"""

import argparse

import numpy as np

from wrdpg.asymptotics import sbm_covariance
from wrdpg.model import Normal, SbmSpec, block_assignments, sample_sbm, sbm_latent_positions
from wrdpg.spectral import embed_moments


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=1000)
    ap.add_argument("--K", type=int, default=6)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    spec = SbmSpec([1.0], [[0.5]], Normal(1.0, 0.1))
    pos = sbm_latent_positions(spec, args.K)
    W = sample_sbm(spec, block_assignments(spec.pi, args.N), args.seed)
    print(f"{'k':>2} {'mean x_hat':>11} {'theory':>9} {'N var':>8} {'theory':>8}")
    for emb in embed_moments(W, 1, args.K):
        x = np.abs(emb.positions[:, 0])  # sign is arbitrary for d = 1
        var = sbm_covariance(spec, pos, emb.k, 0).Sigma[0, 0]
        print(f"{emb.k:>2} {x.mean():>11.5f} {pos[emb.k][0, 0]:>9.5f} {args.N * x.var():>8.4f} {var:>8.4f}")


if __name__ == "__main__":
    main()
