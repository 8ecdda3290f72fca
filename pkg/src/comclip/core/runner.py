"""Main orchestrator for comclip runs."""

import asyncio
import logging
import threading
from collections.abc import Sequence
from pathlib import Path
from typing import Any, NamedTuple

from comclip.clients.base import DenseCaptioner, LLMClient
from comclip.clients.trace import TraceCollector
from comclip.composition.models import CompositionConfig, CompositionResult
from comclip.composition.pipeline import ComposedScorer, RegionHints, ScoringMemo
from comclip.core.config import RunConfig
from comclip.datasets.loader import ImageStore
from comclip.encoders.base import EncoderBackend
from comclip.encoders.cache import CachedBackend, EmbeddingCache
from comclip.encoders.registry import get_backend_factory
from comclip.errors import UsageError
from comclip.evaluation.ablation import AblationTable, evaluate_dataset, run_ablation_grid
from comclip.evaluation.metrics import Scorer, eval_retrieval, triplet_agreement
from comclip.evaluation.models import DatasetKind, EvalReport, MatchInstance, RetrievalQuery
from comclip.evaluation.timing import OverheadReport, measure_overhead
from comclip.grounding.aligner import Aligner, LexicalAligner
from comclip.grounding.images import ImageArray
from comclip.grounding.models import GroundingMap, Subimage
from comclip.parsing.models import Entity, ParsedSentence

logger = logging.getLogger(__name__)


class GroundedSubimages(NamedTuple):
    """What `ComCLIP.ground` produced for one image-sentence pair."""

    parsed: ParsedSentence
    grounding: GroundingMap
    subimages: list[tuple[Entity, Subimage]]


def regions_by_pair(instances: Sequence[Any]) -> dict[tuple[str, str], RegionHints]:
    """Ground-truth regions keyed by (image ref, sentence), from matching instances."""
    table: dict[tuple[str, str], RegionHints] = {}
    for inst in instances:
        if not isinstance(inst, MatchInstance):
            continue
        if inst.pos_regions is not None:
            table[(inst.pos_image, inst.sentence)] = inst.pos_regions
        if inst.neg_regions is not None:
            table[(inst.neg_image, inst.sentence)] = inst.neg_regions
    return table


class ComCLIP:
    """
    Main entry point for compositional scoring and benchmark runs.

    Builds the encoder backend, service clients, parser and aligner from a
    `RunConfig` on first use. All scorers handed out share one embedding
    cache and one parse/grounding memo.

    Example:
        >>> runner = ComCLIP(RunConfig(backend="mock", mock_dim=64))
        >>> result = runner.score(image, "a man is hitting a baseball")
        >>> result.final_score

        # With a pre-built backend
        >>> runner = ComCLIP(backend=MyClipBackend())
    """

    def __init__(
        self,
        config: RunConfig | None = None,
        *,
        backend: EncoderBackend | None = None,
        llm_client: LLMClient | None = None,
        captioner: DenseCaptioner | None = None,
        trace: TraceCollector | None = None,
        lenient: bool = False,
    ) -> None:
        """
        Args:
            config: Run configuration; defaults to `RunConfig()`.
            backend: Encoder to use instead of the configured registry entry.
            llm_client: LLM client to use instead of the configured one.
            captioner: Dense captioner to use instead of the configured one.
            trace: Collector receiving one trace per service call.
            lenient: Skip and log failing instances instead of aborting.
        """
        self.config = config or RunConfig()
        self.trace = trace
        self.lenient = lenient
        self._backend_override = backend
        self._llm_override = llm_client
        self._captioner_override = captioner

        self._scorer: ComposedScorer | None = None
        self._init_lock = threading.Lock()

    def __repr__(self) -> str:
        return f"ComCLIP(backend={self.config.backend!r}, parser={self.config.parser!r})"

    def _build_backend(self) -> CachedBackend:
        inner = self._backend_override or get_backend_factory(self.config.backend)(
            self.config, self.trace
        )
        cache = EmbeddingCache(self.config.cache_dir) if self.config.cache_dir else None
        if cache is not None:
            logger.info("Embedding cache at %s", cache.directory)
        return CachedBackend(inner, cache, self.config.memo_entries)

    def _build_llm(self) -> LLMClient | None:
        if self._llm_override is not None:
            return self._llm_override
        config = self.config
        if config.llm == "none":
            if config.needs_llm:
                raise UsageError("parser/aligner 'llm' needs an LLM client (set llm)")
            return None

        from comclip.clients.llm import (
            ClaudeLLMClient,
            HTTPLLMClient,
            RecordingLLMClient,
            ReplayLLMClient,
        )
        from comclip.clients.replay import FixtureStore

        match config.llm:
            case "replay":
                if config.llm_fixtures is None:
                    raise UsageError("llm 'replay' needs llm_fixtures")
                return ReplayLLMClient(FixtureStore(config.llm_fixtures))
            case "claude":
                client: LLMClient = ClaudeLLMClient()
            case "http":
                if not config.llm_endpoint:
                    raise UsageError("llm 'http' needs llm_endpoint")
                client = HTTPLLMClient.from_endpoint(
                    config.llm_endpoint,
                    timeout_s=config.llm_timeout_s,
                    retries=config.llm_retries,
                    max_in_flight=config.llm_max_in_flight,
                    trace=self.trace,
                )
        if config.record_fixtures and config.llm_fixtures is not None:
            return RecordingLLMClient(client, FixtureStore(config.llm_fixtures))
        return client

    def _build_captioner(self) -> DenseCaptioner | None:
        if self._captioner_override is not None:
            return self._captioner_override
        config = self.config
        if config.captioner == "none":
            return None

        from comclip.clients.captioner import (
            HTTPDenseCaptioner,
            RecordingDenseCaptioner,
            ReplayDenseCaptioner,
        )
        from comclip.clients.replay import FixtureStore

        if config.captioner == "replay":
            if config.captioner_fixtures is None:
                raise UsageError("captioner 'replay' needs captioner_fixtures")
            return ReplayDenseCaptioner(FixtureStore(config.captioner_fixtures))
        if not config.captioner_endpoint:
            raise UsageError("captioner 'http' needs captioner_endpoint")
        live = HTTPDenseCaptioner.from_endpoint(
            config.captioner_endpoint,
            timeout_s=config.llm_timeout_s,
            retries=config.llm_retries,
            max_in_flight=config.captioner_max_in_flight,
            trace=self.trace,
        )
        if config.record_fixtures and config.captioner_fixtures is not None:
            return RecordingDenseCaptioner(live, FixtureStore(config.captioner_fixtures))
        return live

    def _build_scorer(self) -> ComposedScorer:
        from comclip.grounding.aligner import LLMAligner
        from comclip.parsing.llm import LLMParser
        from comclip.parsing.rule_based import RuleBasedParser

        llm = self._build_llm()
        aligner: Aligner = LexicalAligner()
        if self.config.aligner == "llm" and llm is not None:
            aligner = LLMAligner(llm)
        parser: LLMParser | None = None
        if self.config.parser == "llm" and llm is not None:
            parser = LLMParser(llm, self.config.spacy_model)

        scorer = ComposedScorer(
            self._build_backend(),
            parser=parser or RuleBasedParser(self.config.spacy_model),
            captioner=self._build_captioner(),
            aligner=aligner,
            blur_radius_fraction=self.config.blur_radius_fraction,
            crop_tight=self.config.crop_tight,
            memo=ScoringMemo(self.config.memo_entries),
        )
        logger.debug("Built %r", scorer)
        return scorer

    @property
    def scorer(self) -> ComposedScorer:
        """The shared scorer, built on first access.

        A threading lock guards construction so the runner can be reused
        across several `asyncio.run` calls.
        """
        with self._init_lock:
            if self._scorer is None:
                self._scorer = self._build_scorer()
            return self._scorer

    @property
    def backend(self) -> CachedBackend:
        backend = self.scorer.backend
        assert isinstance(backend, CachedBackend)  # guaranteed by _build_backend()
        return backend

    def scorer_for(
        self,
        config: CompositionConfig | None,
        images: ImageStore,
        regions: dict[tuple[str, str], RegionHints] | None = None,
    ) -> Scorer:
        """Adapt `ComposedScorer.score` to ``(image_ref, sentence) -> float``.

        ``config=None`` returns the uncomposed baseline scorer.
        """
        scorer = self.scorer
        table = regions or {}

        async def composed(image_ref: str, sentence: str) -> float:
            image = await asyncio.to_thread(images.get, image_ref)
            result = await scorer.score(image, sentence, config, table.get((image_ref, sentence)))
            return result.final_score

        async def baseline(image_ref: str, sentence: str) -> float:
            image = await asyncio.to_thread(images.get, image_ref)
            return await scorer.baseline(image, sentence)

        return baseline if config is None else composed

    async def score_async(
        self,
        image: ImageArray,
        sentence: str,
        config: CompositionConfig | None = None,
        regions: RegionHints | None = None,
    ) -> CompositionResult:
        """Compositional score of one pair, with every intermediate kept."""
        return await self.scorer.score(image, sentence, config or self.config.composition, regions)

    async def baseline_async(self, image: ImageArray, sentence: str) -> float:
        return await self.scorer.baseline(image, sentence)

    async def parse_async(self, sentence: str) -> ParsedSentence:
        return await self.scorer.parse(sentence)

    async def ground_async(
        self,
        image: ImageArray,
        sentence: str,
        config: CompositionConfig | None = None,
        regions: RegionHints | None = None,
    ) -> GroundedSubimages:
        """Parse, ground and build the subimages of one pair without encoding."""
        scorer = self.scorer
        parsed = await scorer.parse(sentence)
        grounding = await scorer.ground(image, parsed, regions)
        pairs = scorer.build_subimages(
            image, parsed, grounding, config or self.config.composition
        )
        return GroundedSubimages(parsed, grounding, pairs)

    async def evaluate_async(
        self,
        kind: DatasetKind,
        instances: Sequence[Any],
        images: ImageStore,
        *,
        config: CompositionConfig | None = None,
        baseline: bool = False,
    ) -> EvalReport:
        """
        Run the protocol of ``kind`` over loaded instances.

        Args:
            kind: Matching, Winoground or VL-checklist dataset kind.
            instances: Loaded instances.
            images: Resolves the instances' image refs.
            config: Composition config; defaults to the run config's.
            baseline: Score with the uncomposed baseline instead.
        """
        composition = None if baseline else (config or self.config.composition)
        scorer = self.scorer_for(composition, images, regions_by_pair(instances))
        label = "baseline" if composition is None else composition.label
        logger.info("Evaluating %d %s instances with %s", len(instances), kind, label)
        return await evaluate_dataset(
            kind,
            instances,
            scorer,
            config=label,
            seed=self.config.seed,
            parallelism=self.config.parallelism,
            lenient=self.lenient,
        )

    async def rerank_async(
        self,
        queries: Sequence[RetrievalQuery],
        gallery: Sequence[str],
        images: ImageStore,
        *,
        config: CompositionConfig | None = None,
        k: int = 10,
    ) -> EvalReport:
        """Baseline ranking of the whole gallery, compositional re-scoring of the top ``k``."""
        if k < 1:
            raise UsageError(f"k must be >= 1, got {k}")
        composition = config or self.config.composition
        return await eval_retrieval(
            queries,
            gallery,
            self.scorer_for(None, images),
            self.scorer_for(composition, images),
            k,
            config=composition.label,
            seed=self.config.seed,
            parallelism=self.config.parallelism,
            lenient=self.lenient,
        )

    async def ablate_async(
        self,
        kind: DatasetKind,
        instances: Sequence[Any],
        images: ImageStore,
        configs: Sequence[CompositionConfig],
        *,
        include_baseline: bool = True,
    ) -> AblationTable:
        """One evaluation row per config, all sharing caches and memos."""
        regions = regions_by_pair(instances)
        return await run_ablation_grid(
            kind,
            instances,
            configs,
            lambda c: self.scorer_for(c, images, regions),
            baseline_scorer=self.scorer_for(None, images) if include_baseline else None,
            seed=self.config.seed,
            parallelism=self.config.parallelism,
            lenient=self.lenient,
        )

    async def agreement_async(self, instances: Sequence[MatchInstance]) -> float:
        """Fraction of annotated triplets the configured parser reproduces."""
        return await triplet_agreement(instances, self.scorer.parser)

    async def overhead_async(
        self,
        pairs: Sequence[tuple[ImageArray, str]],
        config: CompositionConfig | None = None,
        repeats: int = 3,
    ) -> OverheadReport:
        return await measure_overhead(
            self.scorer, pairs, config or self.config.composition, repeats
        )

    # The sync wrappers call asyncio.run() and cannot be used inside a running event loop
    # (Jupyter, async tests); use the *_async methods there.

    def score(
        self,
        image: ImageArray,
        sentence: str,
        config: CompositionConfig | None = None,
        regions: RegionHints | None = None,
    ) -> CompositionResult:
        return asyncio.run(self.score_async(image, sentence, config, regions))

    def parse(self, sentence: str) -> ParsedSentence:
        return asyncio.run(self.parse_async(sentence))

    def ground(
        self,
        image: ImageArray,
        sentence: str,
        config: CompositionConfig | None = None,
        regions: RegionHints | None = None,
    ) -> GroundedSubimages:
        return asyncio.run(self.ground_async(image, sentence, config, regions))

    def evaluate(
        self,
        kind: DatasetKind,
        instances: Sequence[Any],
        images: ImageStore,
        *,
        config: CompositionConfig | None = None,
        baseline: bool = False,
    ) -> EvalReport:
        return asyncio.run(
            self.evaluate_async(kind, instances, images, config=config, baseline=baseline)
        )

    def rerank(
        self,
        queries: Sequence[RetrievalQuery],
        gallery: Sequence[str],
        images: ImageStore,
        *,
        config: CompositionConfig | None = None,
        k: int = 10,
    ) -> EvalReport:
        return asyncio.run(self.rerank_async(queries, gallery, images, config=config, k=k))

    def ablate(
        self,
        kind: DatasetKind,
        instances: Sequence[Any],
        images: ImageStore,
        configs: Sequence[CompositionConfig],
        *,
        include_baseline: bool = True,
    ) -> AblationTable:
        return asyncio.run(
            self.ablate_async(
                kind, instances, images, configs, include_baseline=include_baseline
            )
        )


def image_store_for(path: str | Path, root: str | Path | None = None) -> ImageStore:
    """Image store resolving refs against ``root`` or the dataset file's directory."""
    return ImageStore(Path(root) if root is not None else Path(path).parent)
