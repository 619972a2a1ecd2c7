import numpy as np
import pytest

from regionharvest.classifier import (ClassifierConfig, TrainedModel, accuracy_of,
                                      evaluate, load_model, measure_predict_time, predict,
                                      predict_batch, save_model, scores, train)


def toy_data(seed=0, n_per_class=20, classes=3, dims=6, spread=0.08):
    rng = np.random.default_rng(seed)
    centers = rng.random((classes, dims))
    X, y = [], []
    for k in range(classes):
        X.append(centers[k] + spread * rng.standard_normal((n_per_class, dims)))
        y.extend([k] * n_per_class)
    return np.vstack(X), np.array(y)


class TestConfig:
    def test_bad_kind_rejected(self):
        with pytest.raises(ValueError, match="kind"):
            ClassifierConfig(kind="rbf-svm")

    def test_bad_epochs_rejected(self):
        with pytest.raises(ValueError, match="epochs"):
            ClassifierConfig(epochs=0)


class TestTrain:
    def test_linearly_separable_pair_reaches_100(self):
        X = np.vstack([np.zeros((10, 5)), np.ones((10, 5))])
        y = np.array([0] * 10 + [1] * 10)
        model = train(X, y, ClassifierConfig(kind="linear"), seed=0)
        assert accuracy_of(model, X, y) == 1.0

    def test_centroid_singletons_equal_samples(self):
        X = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
        y = np.array([0, 1, 2])
        model = train(X, y, ClassifierConfig(kind="centroid"), seed=0)
        assert np.array_equal(model.weights, X)

    def test_bit_for_bit_deterministic(self):
        X, y = toy_data()
        a = train(X, y, ClassifierConfig(kind="linear"), seed=5)
        b = train(X, y, ClassifierConfig(kind="linear"), seed=5)
        assert np.array_equal(a.weights, b.weights)
        assert np.array_equal(a.biases, b.biases)

    def test_missing_class_rejected(self):
        X = np.ones((4, 3))
        y = np.array([0, 0, 2, 2])
        with pytest.raises(ValueError, match="missing"):
            train(X, y, ClassifierConfig(), seed=0)

    def test_ragged_vectors_rejected(self):
        with pytest.raises(ValueError):
            train([np.zeros(3), np.zeros(4)], [0, 1], ClassifierConfig(), seed=0)


class TestPredict:
    def test_centroid_exact_match(self):
        X = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        y = np.array([0, 1, 2])
        model = train(X, y, ClassifierConfig(kind="centroid"), seed=0)
        assert predict(model, np.array([0.0, 1.0])) == 2

    def test_all_zero_weights_tie_breaks_to_class_0(self):
        model = TrainedModel(kind="linear", class_count=4, feature_length=3,
                             weights=np.zeros((4, 3)), biases=np.zeros(4),
                             config=ClassifierConfig(), seed=0)
        assert predict(model, np.array([0.5, 0.5, 0.5])) == 0

    def test_length_mismatch_rejected(self):
        X, y = toy_data()
        model = train(X, y, ClassifierConfig(kind="centroid"), seed=0)
        with pytest.raises(ValueError, match="length"):
            predict(model, np.zeros(X.shape[1] + 1))

    def test_matches_score_then_argmax_oracle(self):
        rng = np.random.default_rng(13)
        model = TrainedModel(kind="linear", class_count=5, feature_length=8,
                             weights=rng.standard_normal((5, 8)),
                             biases=rng.standard_normal(5),
                             config=ClassifierConfig(), seed=0)
        for _ in range(100):
            x = rng.standard_normal(8)
            manual = [float(np.dot(model.weights[k], x)) + float(model.biases[k])
                      for k in range(5)]
            best = 0
            for k in range(1, 5):
                if manual[k] > manual[best]:
                    best = k
            assert predict(model, x) == best
            assert np.allclose(scores(model, x), manual)

    def test_centroid_matches_distance_oracle(self):
        rng = np.random.default_rng(29)
        X, y = toy_data(seed=2)
        model = train(X, y, ClassifierConfig(kind="centroid"), seed=0)
        for _ in range(50):
            x = rng.standard_normal(X.shape[1])
            dists = [float(((model.weights[k] - x) ** 2).sum()) for k in range(3)]
            best = int(np.argmin(dists))
            assert predict(model, x) == best

    def test_batch_agrees_with_single(self):
        X, y = toy_data(seed=4)
        for kind in ("linear", "centroid"):
            model = train(X, y, ClassifierConfig(kind=kind), seed=1)
            batch = predict_batch(model, X)
            single = np.array([predict(model, x) for x in X])
            assert np.array_equal(batch, single)

    def test_order_invariance(self):
        X, y = toy_data(seed=6)
        model = train(X, y, ClassifierConfig(kind="linear"), seed=0)
        perm = np.random.default_rng(0).permutation(len(X))
        assert np.array_equal(predict_batch(model, X)[perm], predict_batch(model, X[perm]))


class TestEvaluate:
    def test_perfect_training_data(self):
        X = np.vstack([np.zeros((10, 4)), np.ones((10, 4))])
        y = np.array([0] * 10 + [1] * 10)
        model = train(X, y, ClassifierConfig(kind="linear"), seed=0)
        report = evaluate(model, X, y)
        assert report.accuracy == 1.0 and report.correct == 20 and report.total == 20

    def test_all_wrong_labels(self):
        X = np.vstack([np.zeros((10, 4)), np.ones((10, 4))])
        y = np.array([0] * 10 + [1] * 10)
        model = train(X, y, ClassifierConfig(kind="linear"), seed=0)
        report = evaluate(model, X, 1 - y)
        assert report.accuracy == 0.0

    def test_matches_counting_oracle(self):
        X, y = toy_data(seed=8, spread=0.4)
        model = train(X, y, ClassifierConfig(kind="centroid"), seed=0)
        report = evaluate(model, X, y)
        manual = sum(1 for x, label in zip(X, y) if predict(model, x) == label)
        assert report.correct == manual
        assert report.accuracy == manual / len(y)

    def test_accuracy_is_exact_ratio(self):
        X, y = toy_data(seed=9, spread=0.5)
        model = train(X, y, ClassifierConfig(kind="centroid"), seed=0)
        report = evaluate(model, X, y)
        assert report.accuracy == report.correct / report.total

    def test_per_class_weighted_average_equals_accuracy(self):
        X, y = toy_data(seed=10, spread=0.5, n_per_class=17)
        model = train(X, y, ClassifierConfig(kind="centroid"), seed=0)
        report = evaluate(model, X, y)
        counts = np.bincount(y, minlength=model.class_count)
        weighted = float(np.dot(report.per_class_accuracy, counts) / counts.sum())
        assert weighted == pytest.approx(report.accuracy)

    def test_empty_set_rejected(self):
        X, y = toy_data()
        model = train(X, y, ClassifierConfig(kind="centroid"), seed=0)
        with pytest.raises(ValueError, match="empty"):
            evaluate(model, np.zeros((0, X.shape[1])), np.zeros(0, dtype=int))

    def test_fitness_accuracy_equals_evaluate_accuracy(self):
        X, y = toy_data(seed=12, spread=0.4)
        model = train(X, y, ClassifierConfig(kind="linear"), seed=0)
        assert accuracy_of(model, X, y) == evaluate(model, X, y).accuracy


class TestTiming:
    def test_measure_predict_time_positive(self):
        X, y = toy_data()
        model = train(X, y, ClassifierConfig(kind="centroid"), seed=0)
        mean = measure_predict_time(model, X, warmup=10, min_calls=100)
        assert mean > 0.0


class TestSerialization:
    def test_json_round_trip_exact(self, tmp_path):
        X, y = toy_data(seed=3)
        for kind in ("linear", "centroid"):
            model = train(X, y, ClassifierConfig(kind=kind, epochs=7), seed=11)
            path = tmp_path / f"{kind}.json"
            save_model(model, path)
            loaded = load_model(path)
            assert loaded.kind == model.kind
            assert loaded.class_count == model.class_count
            assert loaded.feature_length == model.feature_length
            assert np.array_equal(loaded.weights, model.weights)
            assert np.array_equal(loaded.biases, model.biases)
            assert loaded.config == model.config
            assert loaded.seed == model.seed
            x = X[0]
            assert predict(loaded, x) == predict(model, x)
