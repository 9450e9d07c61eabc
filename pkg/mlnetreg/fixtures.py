"""Synthetic input-output bundle shaped like the 2014 world table.

Flows are dense and positive, larger within a country and within a
community.  ``CAP`` and ``COMP`` are near-linear combinations of ``VA``,
``EMP`` and ``K`` so that VIF screening has something to remove, and ``GO``
loads on the network's community centrality.
"""

from __future__ import annotations

import math
from typing import List

import numpy as np

from mlnetreg.centrality import community_centrality, eigenvector_centrality
from mlnetreg.ingest import DatasetBundle
from mlnetreg.rng import make_rng, stream
from mlnetreg.synth import balanced_labels
from mlnetreg.wiod import scale_to_band, symmetrize

N_SECTORS = 56
N_COUNTRIES = 43
N_COMMUNITIES = 20
COVARIATE_NAMES = ("VA", "CAP", "COMP", "EMP", "K")
RESPONSE_NAME = "GO"
COLLINEAR_NAMES = ("CAP", "COMP")

_FLOWS, _COVARIATES, _COUNTRY_NOISE = 0, 1, 2


def _flows(seed: int, n_sectors: int, n_countries: int, labels: np.ndarray) -> np.ndarray:
    rng = make_rng(stream(seed, _FLOWS))
    sector_size = rng.lognormal(0.0, 0.5, n_sectors)
    country_size = rng.lognormal(0.0, 0.4, n_countries)
    community_pull = rng.lognormal(0.0, 0.6, int(labels.max()))

    mass = np.tile(sector_size * community_pull[labels - 1], n_countries) * np.repeat(country_size, n_sectors)
    flows = np.outer(mass, mass)
    flows *= 1.0 + np.kron(np.eye(n_countries), np.ones((n_sectors, n_sectors)))
    same_community = np.equal.outer(labels, labels).astype(np.float64)
    flows *= 1.0 + np.tile(same_community, (n_countries, n_countries))
    flows *= rng.lognormal(0.0, 0.25, flows.shape)
    return flows


def build_synthetic_io_bundle(
    seed: int = 2014,
    *,
    n_sectors: int = N_SECTORS,
    n_countries: int = N_COUNTRIES,
    n_communities: int = N_COMMUNITIES,
) -> DatasetBundle:
    communities = balanced_labels(n_sectors, n_communities)
    flows = _flows(seed, n_sectors, n_countries, communities.labels)

    B = scale_to_band(symmetrize(flows))
    a_n = math.sqrt(n_sectors * n_countries)
    centrality = eigenvector_centrality(B, n_sectors, n_countries, a_n)
    _, Z = community_centrality(centrality.C, communities)
    z_std = (Z - Z.mean()) / Z.std(ddof=1)

    rng = make_rng(stream(seed, _COVARIATES))
    va, emp, k = rng.standard_normal((3, n_sectors))
    core = va + emp + k
    comp = 2.0 * core + rng.normal(0.0, 0.01, n_sectors)
    cap = 2.0 * core + rng.normal(0.0, 0.1, n_sectors)
    go = 0.9 * va + 0.1 * emp - 0.05 * k + 0.7 * z_std + 0.3 * rng.standard_normal(n_sectors)

    return DatasetBundle(
        supra=flows,
        n_nodes=n_sectors,
        n_layers=n_countries,
        covariates=np.column_stack([va, cap, comp, emp, k]),
        covariate_names=COVARIATE_NAMES,
        response=go,
        response_name=RESPONSE_NAME,
        communities=communities,
        provenance={"source": "synthetic", "seed": seed},
    )


def long_format_rows(bundle: DatasetBundle, seed: int = 2014) -> List[dict]:
    """Sector-by-country rows whose per-sector average equals the bundle's values.

    Country deviations are centred per sector, so averaging over countries
    recovers the sector table up to rounding.
    """

    names = (bundle.response_name, *bundle.covariate_names)
    values = np.column_stack([bundle.response, bundle.covariates])
    deviations = make_rng(stream(seed, _COUNTRY_NOISE)).normal(
        0.0, 0.1, (bundle.n_layers, bundle.n_nodes, values.shape[1])
    )
    deviations -= deviations.mean(axis=0)
    rows = []
    for country in range(bundle.n_layers):
        for sector in range(bundle.n_nodes):
            row = {"sector": sector + 1, "country": f"C{country + 1:02d}"}
            row.update(zip(names, (values[sector] + deviations[country, sector]).tolist()))
            rows.append(row)
    return rows
