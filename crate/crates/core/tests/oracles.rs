use afrai_core::automata::{build_prefix_tree_fra, nearest_reward, quantize_rewards, Label};
use afrai_core::env::{make_corridor_world, make_office_world, sequence_task, GridSpec, GridWorld, Landmark, LabeledMdp};
use afrai_core::oracle::{enumerate_attainable_traces, finite_horizon_optimum, policy_evaluation, product_mdp, value_iteration};
use afrai_core::rl::{run_episode, Hyperparams, QTable, QueryKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn prefix_tree_reproduces_corridor_traces() {
    let env = make_corridor_world();
    let traces = enumerate_attainable_traces(&env, env.task(), 6, 100_000).unwrap();
    let tree = build_prefix_tree_fra(&traces, &env.label_alphabet()).unwrap();
    for t in &traces {
        assert_eq!(tree.run(t.labels()).unwrap(), t.rewards());
    }
    // 2^k label sequences of each length k, each with a single reward pattern
    assert_eq!(traces.len(), (0..=6).map(|k| 1usize << k).sum::<usize>());
}

#[test]
fn quantization_error_is_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for eps in [0.5, 0.1, 0.01] {
        let levels = quantize_rewards(-1.0, 1.0, eps).unwrap();
        for _ in 0..1000 {
            let r: f64 = rng.gen_range(-1.0..=1.0);
            let q = nearest_reward(&levels, r).unwrap();
            assert!((q.to_f64() - r).abs() <= eps + 1e-9, "eps {eps}: {r} -> {q}");
        }
    }
}

fn three_by_three() -> GridWorld {
    let spec = GridSpec {
        width: 3,
        height: 3,
        initial: [1, 1],
        slip: 0.0,
        landmarks: vec![Landmark { cell: [0, 0], prop: 'a' }, Landmark { cell: [2, 2], prop: 'b' }],
        walls: vec![],
    };
    let a = Label::single('a').unwrap();
    let b = Label::single('b').unwrap();
    let task = sequence_task(&['a', 'b'], &[Label::EMPTY, a, b], false).unwrap();
    GridWorld::new(spec, task).unwrap()
}

#[test]
fn q_learning_matches_value_iteration_on_product() {
    let mut env = three_by_three();
    let task = env.task().clone();
    let product = product_mdp(&env, &task);
    assert_eq!(product.num_states(), 9 * task.num_states());
    let vi = value_iteration(&product, 0.9, 1e-12, 100_000).unwrap();

    let hp = Hyperparams { alpha: 0.1, gamma: 0.9, epsilon: 0.1, eplength: 20 };
    let mut q = QTable::new(env.num_states(), task.num_states(), env.num_actions(), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..(100_000 / hp.eplength) {
        run_episode(QueryKind::Equivalence, &task, &mut q, &mut env, &hp, &mut rng);
    }
    let nw = task.num_states();
    let greedy: Vec<usize> = (0..product.num_states()).map(|s| q.greedy_action(s / nw, s % nw)).collect();
    let v = policy_evaluation(&product, &greedy, 0.9, 1e-12, 100_000).unwrap();
    assert!((v[product.initial()] - vi.values[product.initial()]).abs() < 1e-2);
}

#[test]
fn office_optimum_is_one_completion_per_episode() {
    let env = make_office_world(1, None).unwrap();
    let p = product_mdp(&env, env.task());
    let best = finite_horizon_optimum(&p, 200);
    assert!(best > 0.99 && best <= 1.0, "{best}");
    // too short to visit a, b, a, c
    assert_eq!(finite_horizon_optimum(&p, 5), 0.0);
}
