import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sthawkes import (
    ConfigError,
    DataError,
    EventSequence,
    ParseError,
    Rectangle,
    SplitSpec,
    normalize_space,
    one_hot,
    parse_events,
    rescale_time,
    serialize_events,
    split_chronological,
)
from tests.conftest import UNIT_DOMAIN, random_sequence


class TestParse:
    def test_single_row(self):
        seq = parse_events("u,t,x,y\n1,0.5,0.1,-0.2", 1, UNIT_DOMAIN)
        assert len(seq) == 1
        assert seq.duration == 0.5
        assert seq[0].type_id == 1
        assert seq[0].location == (0.1, -0.2)

    def test_sorts_by_time(self):
        csv = "u,t,x,y\n1,3.0,0,0\n1,1.0,0,0\n1,2.0,0,0"
        seq = parse_events(csv, 1, UNIT_DOMAIN)
        assert list(seq.times) == [1.0, 2.0, 3.0]

    def test_stable_sort_on_ties(self):
        csv = "u,t,x,y\n1,1.0,0.5,0\n2,1.0,-0.5,0"
        seq = parse_events(csv, 2, UNIT_DOMAIN)
        assert list(seq.types) == [0, 1]

    def test_type_out_of_range_names_row(self):
        with pytest.raises(DataError, match="row 1"):
            parse_events("u,t,x,y\n3,0.1,0,0", 2, UNIT_DOMAIN)

    def test_location_outside_domain(self):
        with pytest.raises(DataError, match="outside the domain"):
            parse_events("u,t,x,y\n1,0.1,5,0", 1, UNIT_DOMAIN)

    def test_malformed_row_cites_row_number(self):
        with pytest.raises(ParseError, match="row 2"):
            parse_events("u,t,x,y\n1,0.1,0,0\n1,zzz,0,0", 1, UNIT_DOMAIN)

    def test_bad_header(self):
        with pytest.raises(ParseError, match="header"):
            parse_events("a,b,c,d\n1,0.1,0,0", 1, UNIT_DOMAIN)

    def test_duration_override_drops_later_events(self):
        csv = "u,t,x,y\n1,1.0,0,0\n1,5.0,0,0"
        with pytest.warns(UserWarning, match="dropping 1 events"):
            seq = parse_events(csv, 1, UNIT_DOMAIN, duration=2.0)
        assert len(seq) == 1
        assert seq.duration == 2.0

    def test_round_trip(self):
        seq = random_sequence(3, n=40)
        again = parse_events(serialize_events(seq), seq.num_types, seq.domain,
                             duration=seq.duration)
        assert np.array_equal(seq.times, again.times)
        assert np.array_equal(seq.locations, again.locations)
        assert np.array_equal(seq.types, again.types)
        assert serialize_events(seq) == serialize_events(again)


class TestRescale:
    def test_forced_scale(self):
        seq = EventSequence(
            times=[0.0, 2.0, 4.0, 6.0],
            locations=np.zeros((4, 2)),
            types=[0, 0, 0, 0],
            num_types=1, duration=6.0, domain=UNIT_DOMAIN,
        )
        scaled, info = rescale_time(seq)
        assert info.time_scale == 0.5
        assert list(scaled.times) == [0.0, 1.0, 2.0, 3.0]
        assert scaled.duration == 3.0

    def test_unit_gap_fixed_point(self):
        seq = EventSequence(
            times=[0.0, 1.0, 2.0], locations=np.zeros((3, 2)),
            types=[0, 0, 0], num_types=1, duration=2.0, domain=UNIT_DOMAIN,
        )
        scaled, info = rescale_time(seq)
        assert info.time_scale == 1.0
        assert np.array_equal(scaled.times, seq.times)

    def test_single_event_unchanged(self):
        seq = EventSequence(
            times=[7.0], locations=np.zeros((1, 2)), types=[0],
            num_types=1, duration=7.0, domain=UNIT_DOMAIN,
        )
        scaled, info = rescale_time(seq)
        assert info.time_scale == 1.0
        assert scaled.times[0] == 7.0

    def test_round_trip_times(self):
        seq = random_sequence(1, n=30)
        scaled, info = rescale_time(seq)
        assert np.allclose(info.invert_times(scaled.times), seq.times,
                           rtol=1e-15, atol=0)

    def test_preserves_order_and_one_hot(self):
        seq = random_sequence(2, n=30)
        scaled, _ = rescale_time(seq)
        assert np.array_equal(one_hot(seq), one_hot(scaled))
        assert (np.diff(scaled.times) >= 0).all()


class TestNormalizeSpace:
    def test_unit_square(self):
        seq = random_sequence(4, n=20, domain=Rectangle(2.0, 6.0, -3.0, -1.0))
        scaled, info = normalize_space(seq)
        assert scaled.domain == Rectangle(0.0, 1.0, 0.0, 1.0)
        assert scaled.locations.min() >= 0 and scaled.locations.max() <= 1
        back = info.invert_locations(scaled.locations)
        assert np.allclose(back, seq.locations, rtol=0, atol=1e-12)


class TestSplit:
    def test_default_counts_100(self):
        seq = random_sequence(5, n=100)
        fit, val, test = split_chronological(seq)
        assert (len(fit), len(val), len(test)) == (72, 8, 20)

    def test_remainder_goes_to_fit(self):
        seq = random_sequence(6, n=10)
        with pytest.warns(UserWarning, match="validation partition is empty"):
            fit, val, test = split_chronological(seq)
        assert (len(fit), len(val), len(test)) == (8, 0, 2)

    def test_chronological_order_and_windows(self):
        seq = random_sequence(7, n=57)
        fit, val, test = split_chronological(seq)
        assert fit.times[-1] <= val.times[0] <= test.times[0]
        assert fit.t_start == 0.0
        assert val.t_start == fit.duration
        assert test.t_start == val.duration
        assert test.duration == seq.duration

    def test_union_is_input(self):
        seq = random_sequence(8, n=41)
        fit, val, test = split_chronological(seq)
        merged = np.concatenate([fit.times, val.times, test.times])
        assert np.array_equal(merged, seq.times)

    def test_bad_fractions(self):
        with pytest.raises(ConfigError):
            SplitSpec(0.5, 0.5, 0.5)
        with pytest.raises(ConfigError):
            SplitSpec(0.9, -0.1, 0.2)

    @given(st.integers(min_value=5, max_value=300), st.integers(0, 2**31 - 1))
    @settings(max_examples=40, deadline=None)
    def test_floor_rule(self, n, seed):
        seq = random_sequence(seed % 1000, n=n)
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fit, val, test = split_chronological(seq)
        assert len(val) == int(n * 0.08)
        assert len(test) == int(n * 0.20)
        assert len(fit) == n - len(val) - len(test)


class TestOneHot:
    def test_definition(self):
        seq = EventSequence(
            times=[0.0, 1.0, 2.0], locations=np.zeros((3, 2)),
            types=[0, 1, 0], num_types=2, duration=2.0, domain=UNIT_DOMAIN,
        )
        assert one_hot(seq).tolist() == [[1, 0], [0, 1], [1, 0]]

    @given(st.integers(0, 500))
    @settings(max_examples=25, deadline=None)
    def test_properties(self, seed):
        seq = random_sequence(seed, n=37, u_count=3)
        hot = one_hot(seq)
        assert (hot.sum(axis=1) == 1).all()
        assert np.array_equal(hot.sum(axis=0),
                              np.bincount(seq.types, minlength=3))


class TestInvariants:
    def test_times_before_window_start_rejected(self):
        with pytest.raises(DataError):
            EventSequence(times=[1.0], locations=np.zeros((1, 2)), types=[0],
                          num_types=1, duration=5.0, domain=UNIT_DOMAIN,
                          t_start=2.0)

    def test_arrays_read_only(self):
        seq = random_sequence(9, n=5)
        with pytest.raises(ValueError):
            seq.times[0] = -1.0

    def test_slice_window_tiles_parent(self):
        seq = random_sequence(10, n=30)
        a = seq.slice_window(0, 10)
        b = seq.slice_window(10, 30)
        assert a.t_start == 0.0
        assert a.duration == seq.times[9]
        assert b.t_start == a.duration
        assert b.duration == seq.times[-1]
