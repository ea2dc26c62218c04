"""
Shared pytest fixtures for claim verification tests.
"""
import pytest

from src.common.config_loader import ConfigLoader
from src.engine.config import EngineConfig
from src.oracle.backends import ScriptedBackend, ScriptedRules, SemanticRule, TextRule
from src.oracle.cache import PromptCache
from src.oracle.oracle import SemanticOracle
from src.relation.ingest import ingest
from src.relation.models import AttributeSpec, AttrType, Schema

COMPLAINT = "Does the {review} complain about slow or rude service?"
PRAISE = "Does the {review} praise the food?"
DINNER = "Does the {review} describe a dinner visit?"

REVIEWS = [
    {"business": "loc_a", "stars": 5, "review": "The pasta was delicious. We came for dinner."},
    {"business": "loc_a", "stars": 2, "review": "Our server was rude. The place was busy."},
    {"business": "loc_a", "stars": 4, "review": "Tasty dumplings and fresh bread."},
    {"business": "loc_b", "stars": 1, "review": "Service was painfully slow. Dinner was cold."},
    {"business": "loc_b", "stars": 3, "review": "I ordered the special."},
    {"business": "loc_b", "stars": 2, "review": "We waited an hour for drinks."},
    {"business": "loc_c", "stars": 5, "review": "Amazing burgers and crispy fries."},
    {"business": "loc_c", "stars": 4, "review": "Lunch with two coworkers. The soup was delicious."},
]


@pytest.fixture
def loader():
    """Loader for the repository config/ directory."""
    return ConfigLoader()


@pytest.fixture
def review_schema():
    return Schema(attributes=[
        AttributeSpec(name="business", type=AttrType.CATEGORICAL, description="restaurant location"),
        AttributeSpec(name="stars", type=AttrType.INT, description="star rating"),
        AttributeSpec(name="review", type=AttrType.TEXT, description="review text"),
    ])


@pytest.fixture
def review_records():
    return [dict(r) for r in REVIEWS]


@pytest.fixture
def review_relation(review_records, review_schema):
    return ingest(review_records, review_schema)


@pytest.fixture
def scripted_rules():
    """Rule table: complaints, food praise and dinner visits by keyword."""
    return ScriptedRules(
        semantic=[
            SemanticRule(template=COMPLAINT, attribute="review", any_keywords=["rude", "slow", "waited"],
                         query="poor service complaints"),
            SemanticRule(template=PRAISE, attribute="review", any_keywords=["delicious", "tasty", "amazing"]),
            SemanticRule(template=DINNER, attribute="review", any_keywords=["dinner"]),
        ],
        text={
            "decompose_split": TextRule(key="sentence", responses={
                "They serve roast pork.": ["They serve roast pork."],
                "They serve it daily.": ["They serve it daily."],
            }),
            "decompose_resolve": TextRule(key="claim", responses={
                "They serve roast pork.": "The restaurant serves roast pork",
                "They serve it daily.": "The restaurant serves roast pork daily",
            }),
        },
    )


@pytest.fixture
def scripted_backend(scripted_rules):
    return ScriptedBackend(scripted_rules)


@pytest.fixture
def oracle(scripted_backend, loader):
    """Scripted oracle with an in-memory cache."""
    oracle = SemanticOracle(scripted_backend, cache=PromptCache(), loader=loader)
    yield oracle
    oracle.close()


@pytest.fixture
def uncached_oracle(scripted_backend, loader):
    oracle = SemanticOracle(scripted_backend, cache=None, loader=loader)
    yield oracle
    oracle.close()


@pytest.fixture
def engine_cfg():
    return EngineConfig(batch_size=4)


@pytest.fixture(scope="session")
def suite_dir(tmp_path_factory):
    """Synthetic suite generated once per session."""
    from src.harness.synthetic import generate_suite

    root = tmp_path_factory.mktemp("suite")
    generate_suite(root, seed=0)
    return root
