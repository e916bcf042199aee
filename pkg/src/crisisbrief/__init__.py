"""crisisbrief: disaster post enrichment, sampling, reporting, evaluation."""

from .corpus import (
    Corpus,
    DisasterTaxonomy,
    IngestResult,
    Post,
    PostFilter,
    balance_by_undersampling,
    filter_posts,
    ingest_posts,
    relabel_subevents,
    serialize_corpus,
)
from .classify import (
    EnrichmentConfig,
    GroundTruthBackend,
    InferenceEndpoint,
    LexiconBackend,
    RemoteClassifierBackend,
    classify_post,
    enrich_corpus,
    remote_classify,
)
from .gazetteer import Gazetteer, Place, extract_locations
from .gateways import (
    HashingEmbedder,
    HttpChatGateway,
    HttpEmbeddingGateway,
    MockChatGateway,
    ScriptedChatGateway,
    ScriptedEmbeddingGateway,
)
from .judging import ComparisonTable, compare_modes, coverage_judge, judge_quality
from .metrics import (
    MetricScore,
    RougeScore,
    TfidfResult,
    embedding_cosine,
    reference_text,
    rouge_l,
    rouge_n,
    tfidf_cosine,
)
from .reportgen import (
    ChatSession,
    Report,
    ReportRequest,
    TokenBudget,
    attach_references,
    chat_turn,
    create_chat_session,
    generate_report,
    render_prompt,
    token_estimate,
)
from .sampling import (
    Allocation,
    PreFilter,
    Sample,
    SamplingSpec,
    allocate,
    build_sample,
    class_frequencies,
    filter_city_subevents,
    rank_and_select,
)
from .schemas import (
    BUILTIN_SCHEMAS,
    ClassDistribution,
    DimensionSchema,
    EnrichedPost,
    LocationMention,
    get_schema,
)
from .topics import (
    CoherenceCurve,
    TopicModel,
    cluster_topics,
    coherence_cv,
    embed_documents,
    export_topic_clusters,
    select_topic_count,
    topic_terms,
)

__version__ = "0.1.0"
