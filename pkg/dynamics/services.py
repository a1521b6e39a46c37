import logging
import math

import networkx as nx
import numpy as np
from django.conf import settings
from scipy import linalg, sparse

from core.exceptions import InvalidArgument, RejectedCertificate, StateSpaceTooLarge
from core.models import Coalition
from core.services import ProfileService
from dynamics.models import (
    ChainAnalysis, DriftReport, DynamicsMode, DynamicsTrace, EmpiricalBoundReport, EmpiricalBoundSweep, SinkClass,
    TraceStep,
)
from smoothness.models import SmoothnessKind
from smoothness.services import SmoothnessService

logger = logging.getLogger(__name__)

UTILITY_ONLY = 'defined for utility-maximization games only'


def rng_for(seed):
    return np.random.Generator(np.random.PCG64(seed))


class DynamicsService:
    @staticmethod
    def coalition_distribution(n):
        """Coalitions with their probability: size k w.p. (1/k)/H_n, then uniform among C(n, k)."""
        harmonic = ProfileService.harmonic(n)
        return [
            (coalition, (1 / len(coalition)) / harmonic / math.comb(n, len(coalition)))
            for coalition in ProfileService.coalitions(n)
        ]

    @staticmethod
    def joint_best_response(game, coalition, s):
        """
        Joint strategy maximizing the coalition's total utility (minimizing its
        total cost) against s. The current joint strategy wins ties, otherwise
        the lexicographically first maximizer.
        """
        members = coalition.members
        current = tuple(s[i] for i in members)
        totals = []
        for joint in ProfileService.joint_strategies(game, members):
            t = ProfileService.apply_deviation(s, members, joint)
            totals.append((joint, sum(game.value(i, t) for i in members)))
        best = max(game.sign * total for _, total in totals)

        def attains(total):
            return not game.strictly_better(best * game.sign, total)

        for joint, total in totals:
            if joint == current and attains(total):
                return current
        return next(joint for joint, total in totals if attains(total))

    @staticmethod
    def respond(game, s, coalition):
        joint = DynamicsService.joint_best_response(game, coalition, s)
        return ProfileService.apply_deviation(s, coalition.members, joint)

    @staticmethod
    def coalitional_step(game, s, rng):
        n = game.n_players
        sizes = np.arange(1, n + 1)
        weights = (1 / sizes) / ProfileService.harmonic(n)
        k = int(rng.choice(sizes, p=weights / weights.sum()))
        coalition = Coalition.of(n, (int(i) for i in rng.choice(n, size=k, replace=False)))
        return coalition, DynamicsService.respond(game, s, coalition)

    @staticmethod
    def unilateral_step(game, s, rng):
        coalition = Coalition.of(game.n_players, (int(rng.integers(game.n_players)),))
        return coalition, DynamicsService.respond(game, s, coalition)

    @staticmethod
    def initial_profile(game, initial=None):
        if initial is None:
            return (0,) * game.n_players
        return game.validate_profile(initial, allow_out=False)

    @staticmethod
    def run(game, steps, seed, mode=DynamicsMode.COALITIONAL, initial=None):
        if steps < 0:
            raise InvalidArgument(f"Number of steps must be non-negative, got {steps}.")
        step = DynamicsService.coalitional_step if mode == DynamicsMode.COALITIONAL else DynamicsService.unilateral_step
        with_potential = mode == DynamicsMode.UNILATERAL and game.has_potential
        rng = rng_for(seed)
        s = DynamicsService.initial_profile(game, initial)
        trace = DynamicsTrace(seed=seed, mode=DynamicsMode(mode), initial=s, initial_welfare=game.welfare(s))
        for t in range(1, steps + 1):
            coalition, s = step(game, s, rng)
            trace.steps.append(TraceStep(
                t, coalition, s, game.welfare(s), game.potential(s) if with_potential else None,
            ))
        logger.info("%s dynamics on %r: %d steps, seed %d", mode, game, steps, seed)
        return trace

    @staticmethod
    def run_coalitional(game, steps, seed, initial=None):
        return DynamicsService.run(game, steps, seed, DynamicsMode.COALITIONAL, initial)

    @staticmethod
    def run_unilateral(game, steps, seed, initial=None):
        return DynamicsService.run(game, steps, seed, DynamicsMode.UNILATERAL, initial)

    @staticmethod
    def build_chain(game):
        size = ProfileService.count_profiles(game)
        if size > settings.CHAIN_STATE_CAP:
            raise StateSpaceTooLarge(size, settings.CHAIN_STATE_CAP, 'chain states')
        states = list(ProfileService.enumerate_profiles(game))
        index = {s: k for k, s in enumerate(states)}
        distribution = DynamicsService.coalition_distribution(game.n_players)

        rows, cols, data = [], [], []
        for k, s in enumerate(states):
            for coalition, probability in distribution:
                rows.append(k)
                cols.append(index[DynamicsService.respond(game, s, coalition)])
                data.append(probability)
        transition = sparse.csr_matrix((data, (rows, cols)), shape=(size, size))
        logger.debug("built chain of %d states, %d transitions", size, transition.nnz)
        welfare = np.array([game.welfare(s) for s in states])
        return ChainAnalysis(states=states, transition=transition, welfare=welfare)

    @staticmethod
    def stationary(block):
        """Stationary law of an irreducible row-stochastic block."""
        size = block.shape[0]
        if size <= settings.DENSE_SOLVE_LIMIT:
            system = block.toarray().T - np.eye(size)
            system[-1, :] = 1.0
            rhs = np.zeros(size)
            rhs[-1] = 1.0
            law = linalg.solve(system, rhs)
        else:
            logger.warning("sink of %d states: using power iteration", size)
            lazy = (block + sparse.identity(size, format='csr')) / 2
            law = np.full(size, 1 / size)
            for _ in range(settings.POWER_ITERATION_MAX_STEPS):
                following = lazy.T @ law
                if np.max(np.abs(following - law)) <= settings.POWER_ITERATION_TOL:
                    law = following
                    break
                law = following
        law = np.clip(law, 0.0, None)
        return law / law.sum()

    @staticmethod
    def terminal_classes(transition):
        graph = nx.DiGraph()
        graph.add_nodes_from(range(transition.shape[0]))
        sources, targets = transition.nonzero()
        graph.add_edges_from(zip(sources.tolist(), targets.tolist()))
        condensed = nx.condensation(graph)
        classes = [
            sorted(condensed.nodes[c]['members'])
            for c in condensed.nodes if condensed.out_degree(c) == 0
        ]
        return sorted(classes)

    @staticmethod
    def verified_certificate(game, certificate):
        """Re-check a certificate against the game; RejectedCertificate if it fails."""
        if certificate.kind != SmoothnessKind.COALITIONAL:
            raise RejectedCertificate('Best-response bounds need a coalitional certificate.')
        checked = SmoothnessService.check(
            game, certificate.lam, certificate.mu, certificate.s_star, SmoothnessKind.COALITIONAL,
        )
        if not checked.verified:
            raise RejectedCertificate(
                f"({certificate.lam}, {certificate.mu}) fails at profile {checked.witness.profile}."
            )
        return checked

    @staticmethod
    def sink_threshold(game, certificate):
        """(1/H_n) * lam/(1+mu) * OPT, or None with a reason."""
        if not game.maximizes:
            return None, UTILITY_ONLY
        checked = DynamicsService.verified_certificate(game, certificate)
        ratio = checked.lam / (1 + checked.mu)
        return ratio * checked.opt / ProfileService.harmonic(game.n_players), ''

    @staticmethod
    def sink_equilibria(game, certificate=None, chain=None):
        if chain is None:
            chain = DynamicsService.build_chain(game)
        transition = chain.transition
        chain.sinks = []
        for members in DynamicsService.terminal_classes(transition):
            block = transition[members][:, members]
            law = DynamicsService.stationary(block)
            residual = float(np.max(np.abs(block.T @ law - law)))
            chain.sinks.append(SinkClass(
                states=[chain.states[k] for k in members],
                stationary=law.tolist(),
                expected_welfare=float(law @ chain.welfare[members]),
                residual=residual,
            ))
        logger.info("%r: %d coalitional sink equilibria", game, len(chain.sinks))

        if certificate is not None:
            chain.threshold, chain.threshold_reason = DynamicsService.sink_threshold(game, certificate)
            if chain.threshold is not None:
                chain.bound_holds = all(
                    sink.expected_welfare >= chain.threshold - settings.SINK_BOUND_TOL for sink in chain.sinks
                )
        return chain

    @staticmethod
    def check_one_step_drift(game, chain, certificate):
        """E[SW(next) | s] against (1/H_n)(lam * OPT - mu * SW(s)) at every state."""
        if not game.maximizes:
            return DriftReport(holds=None, reason=UTILITY_ONLY)
        checked = DynamicsService.verified_certificate(game, certificate)
        expected = chain.transition @ chain.welfare
        bounds = (checked.lam * checked.opt - checked.mu * chain.welfare) / ProfileService.harmonic(game.n_players)
        margins = expected - bounds
        worst = int(np.argmin(margins))
        return DriftReport(
            holds=bool(margins[worst] >= -settings.IMPROVEMENT_TOL * max(1.0, abs(checked.opt))),
            min_margin=float(margins[worst]),
            worst_state=chain.states[worst],
            expected_next=expected.tolist(),
            bounds=bounds.tolist(),
        )

    @staticmethod
    def empirical_bound_check(trace, certificate, opt):
        """Empirical mean welfare of a trace against ((T-1)/(2T)) * lam/(H_n+mu) * OPT."""
        if not certificate.verified:
            raise RejectedCertificate('Certificate is not verified.')
        if not certificate.maximizes:
            raise InvalidArgument(f"Empirical bound is {UTILITY_ONLY}.")
        steps = len(trace.steps)
        harmonic = ProfileService.harmonic(len(trace.initial))
        factor = (steps - 1) / (2 * steps) if steps else 0.0
        threshold = factor * certificate.lam / (harmonic + certificate.mu) * opt
        mean = trace.empirical_mean_welfare
        return EmpiricalBoundReport(
            seed=trace.seed,
            steps=steps,
            mean_welfare=mean,
            threshold=threshold,
            margin=mean - threshold,
            passed=mean >= threshold - settings.IMPROVEMENT_TOL,
        )

    @staticmethod
    def empirical_bound(game, certificate, trace):
        """Re-check the certificate, then compare one coalitional trace with its threshold."""
        if not game.maximizes:
            raise InvalidArgument(f"Empirical bound is {UTILITY_ONLY}.")
        if trace.mode != DynamicsMode.COALITIONAL:
            raise InvalidArgument('Empirical bound applies to coalitional dynamics.')
        checked = DynamicsService.verified_certificate(game, certificate)
        return DynamicsService.empirical_bound_check(trace, checked, checked.opt)

    @staticmethod
    def empirical_bound_sweep(game, certificate, steps, seeds, initial=None):
        seeds = list(seeds)
        if not seeds:
            raise InvalidArgument('At least one seed is required.')
        if not game.maximizes:
            raise InvalidArgument(f"Empirical bound is {UTILITY_ONLY}.")
        checked = DynamicsService.verified_certificate(game, certificate)
        reports = [
            DynamicsService.empirical_bound_check(
                DynamicsService.run_coalitional(game, steps, seed, initial), checked, checked.opt,
            )
            for seed in seeds
        ]
        worst = min(reports, key=lambda report: report.margin)
        logger.info(
            "empirical bound on %r over %d seeds: min margin %g (seed %d)",
            game, len(seeds), worst.margin, worst.seed,
        )
        return EmpiricalBoundSweep(
            reports=reports,
            min_margin=worst.margin,
            worst_seed=worst.seed,
            passed=all(report.passed for report in reports),
        )

    @staticmethod
    def unilateral_guarantee(n, lam, mu, eps):
        """
        Steps after which random-player best response reaches, in expectation,
        the returned fraction of the optimal welfare in a game whose potential is
        monotone submodular and (lam, mu)-close to the welfare.
        """
        if n < 1 or lam <= 0 or mu <= 0:
            raise InvalidArgument(f"Need n >= 1 and positive (lam, mu), got n={n}, ({lam}, {mu}).")
        share = lam / (lam + 1)
        if not 0 < eps < share:
            raise InvalidArgument(f"eps must lie in (0, {share}), got {eps}.")
        steps = math.ceil(n * share * math.log(share / eps))
        return steps, (lam / mu) * (share - eps)

    @staticmethod
    def mean_welfare_after(game, steps, seeds):
        finals = [DynamicsService.run_unilateral(game, steps, seed).final_welfare for seed in seeds]
        if not finals:
            raise InvalidArgument('At least one seed is required.')
        return float(np.mean(finals))
