"""Synthetic stand-ins for the evaluation datasets.

``nursery_like`` enumerates the full attribute space of the UCI Nursery data
(same attributes, same value lists, 12,960 rows) and labels each record with
a small hand-written hierarchical rule model in the spirit of the original
DEX model.  The rules are NOT the original ones, so numbers obtained on it
are not comparable with published Nursery results.

``gss_like`` draws survey-style records with a three-valued ``happiness``
attribute that is one of the main drivers of the label, loosely modelled on
the General Social Survey subset used in attribute-inference studies.
"""

from __future__ import annotations

import itertools

import numpy as np

from .data import CATEGORICAL, Dataset, FeatureMeta

NURSERY_ATTRIBUTES = {
    "parents": ("usual", "pretentious", "great_pret"),
    "has_nurs": ("proper", "less_proper", "improper", "critical", "very_crit"),
    "form": ("complete", "completed", "incomplete", "foster"),
    "children": ("1", "2", "3", "more"),
    "housing": ("convenient", "less_conv", "critical"),
    "finance": ("convenient", "inconv"),
    "social": ("nonprob", "slightly_prob", "problematic"),
    "health": ("recommended", "priority", "not_recom"),
}
NURSERY_CLASSES = ("not_recom", "recommend", "very_recom", "priority", "spec_prior")


def _schema(attrs):
    return tuple(FeatureMeta(name, CATEGORICAL, cats, i) for i, (name, cats) in enumerate(attrs.items()))


def nursery_like() -> Dataset:
    """Every combination of the Nursery attributes, labelled by rule."""
    dims = [len(v) for v in NURSERY_ATTRIBUTES.values()]
    X = np.array(list(itertools.product(*(range(k) for k in dims))), dtype=np.int64)
    parents, has_nurs, form, children, housing, finance, social, health = X.T
    # intermediate concepts on a three-level scale (0 best .. 2 worst)
    employ = np.digitize(parents + has_nurs, [2, 4])
    structure = np.digitize(np.minimum(form, 2) + np.minimum(children, 2), [2, 3])
    struct_finan = np.digitize(structure + housing + finance, [2, 4])
    # social only matters through its interaction with health
    soc_health = np.where(health == 0, np.where(social < 2, 0, 1), np.where(social == 0, 1, 2))
    total = employ + struct_finan + soc_health
    cls = np.select(
        [total == 0, total <= 1, total <= 3],
        [NURSERY_CLASSES.index("recommend"), NURSERY_CLASSES.index("very_recom"),
         NURSERY_CLASSES.index("priority")],
        default=NURSERY_CLASSES.index("spec_prior"),
    )
    cls = np.where(health == 2, NURSERY_CLASSES.index("not_recom"), cls)
    label = FeatureMeta("class", CATEGORICAL, NURSERY_CLASSES, 0)
    return Dataset(_schema(NURSERY_ATTRIBUTES), label, X.astype(np.float64), cls)


GSS_ATTRIBUTES = {
    "year": ("1974", "1977", "1980", "1984", "1988", "1991", "1994", "1998"),
    "age": ("18-29", "30-39", "40-49", "50-59", "60-69", "70+"),
    "sex": ("female", "male"),
    "race": ("black", "other", "white"),
    "education": ("lt_high_school", "high_school", "junior_college", "bachelor", "graduate"),
    "income": ("lt_5k", "5k-10k", "10k-15k", "15k-20k", "20k-25k", "25k+"),
    "religion": ("catholic", "jewish", "none", "other", "protestant"),
    "region": ("e_nor_central", "e_sou_central", "middle_atlantic", "mountain", "new_england",
               "pacific", "south_atlantic", "w_nor_central", "w_sou_central"),
    "children": ("0", "1", "2", "3", "4+"),
    "divorce": ("no", "yes"),
    "xmovie": ("no", "yes"),
    "pornlaw": ("illegal_all", "illegal_minors", "legal"),
    "attend": ("never", "yearly", "monthly", "weekly", "more_than_weekly"),
    "polviews": ("ext_liberal", "liberal", "slight_liberal", "moderate", "slight_conservative",
                 "conservative", "ext_conservative"),
    "class": ("lower", "working", "middle", "upper"),
    "health": ("poor", "fair", "good", "excellent"),
    "wrkstat": ("full_time", "part_time", "retired", "other"),
    "happiness": ("Not too happy", "Pretty happy", "Very happy"),
}
GSS_CLASSES = ("not_too_happy", "pretty_happy", "very_happy")


def gss_like(n: int = 24455, seed: int = 0) -> Dataset:
    """Survey-style records whose label is marital happiness.

    Age and number of children drive the label most, with ``happiness``
    (general happiness) a strong third; ``happiness`` itself is only weakly
    predictable from the other attributes (health, income), so its marginal
    is close to [0.6, 0.4] once booleanized as "Very happy" versus the rest.
    Year, region and the remaining attitude columns are pure noise.
    """
    rng = np.random.default_rng(seed)

    def draw(name, p=None):
        k = len(GSS_ATTRIBUTES[name])
        return rng.choice(k, size=n, p=p)

    year = draw("year")
    age = draw("age", [0.22, 0.24, 0.19, 0.15, 0.12, 0.08])
    sex = draw("sex")
    race = draw("race", [0.11, 0.04, 0.85])
    education = draw("education", [0.22, 0.50, 0.06, 0.14, 0.08])
    income = np.clip(education + rng.integers(-1, 3, size=n) + 1, 0, 5)
    religion = draw("religion", [0.26, 0.02, 0.08, 0.03, 0.61])
    region = draw("region")
    children = np.clip(np.minimum(age, 3) + rng.integers(-2, 2, size=n), 0, 4)
    divorce = (rng.random(n) < 0.12 + 0.04 * np.minimum(age, 3)).astype(np.int64)
    xmovie = (rng.random(n) < 0.35 - 0.04 * age).astype(np.int64)
    pornlaw = draw("pornlaw", [0.4, 0.5, 0.1])
    attend = np.clip(draw("attend") + (religion == 4) - (religion == 2), 0, 4)
    polviews = draw("polviews", [0.03, 0.12, 0.14, 0.37, 0.17, 0.14, 0.03])
    klass = np.clip((income + rng.integers(-2, 2, size=n)) // 2, 0, 3)
    health = draw("health", [0.07, 0.2, 0.43, 0.3])
    wrkstat = np.where(age >= 4, 2, draw("wrkstat", [0.55, 0.12, 0.0, 0.33]))

    happy_logit = -0.75 + 0.25 * (health - 1.5) + 0.08 * (income - 2.5) + 0.2 * (1 - divorce)
    very = rng.random(n) < 1.0 / (1.0 + np.exp(-happy_logit))
    not_too = ~very & (rng.random(n) < 0.18 - 0.03 * (health - 1.5))
    happiness = np.where(very, 2, np.where(not_too, 0, 1))

    latent = (
        0.8 * ((happiness == 2) - 0.8 * (happiness == 0))
        - 0.45 * np.abs(age - 1)
        - 0.5 * np.abs(children - 1)
        - 0.45 * divorce
        + 0.1 * (health - 1.5)
        + 0.05 * (attend - 2)
        + rng.logistic(0.0, 0.4, size=n)
    )
    # roughly 20% / 34% / 46% across the three classes
    label = np.digitize(latent, np.quantile(latent, [0.2, 0.54]))

    cols = [year, age, sex, race, education, income, religion, region, children, divorce,
            xmovie, pornlaw, attend, polviews, klass, health, wrkstat, happiness]
    X = np.column_stack(cols).astype(np.float64)
    meta = FeatureMeta("marital_happiness", CATEGORICAL, GSS_CLASSES, 0)
    return Dataset(_schema(GSS_ATTRIBUTES), meta, X, label)


def label_equals_feature(n: int = 400, n_noise: int = 3, seed: int = 0) -> Dataset:
    """Binary label identical to boolean feature ``s``, plus independent noise columns."""
    rng = np.random.default_rng(seed)
    s = rng.integers(0, 2, size=n)
    noise = rng.integers(0, 3, size=(n, n_noise))
    X = np.column_stack([s, noise]).astype(np.float64)
    names = ["s"] + [f"noise{i}" for i in range(n_noise)]
    return Dataset.from_arrays(X, s, names, [2] + [3] * n_noise)
