use sentimarket_web::{
    analyze, analyze_tweet, compare, compare_models, demo_signal, denoise_demo, denoise_signal,
};

#[test]
fn tweet_analysis() {
    let a = analyze("Panic buying again &amp; no toilet paper, terrible! https://t.co/x 😷 @bob");
    assert_eq!(a.cleaned, "Panic buying again & no toilet paper, terrible!");
    let phrases: Vec<&str> = a.keywords.iter().map(|k| k.phrase.as_str()).collect();
    assert_eq!(phrases, ["toilet paper", "panic buying"]);
    assert!(a.keywords.iter().all(|k| k.group == "panic-buying"));
    assert!(a.kept_by_filter);
    assert!(a.score < 0.0);
    let sum: f64 = a.contributions.iter().map(|c| c.value).sum();
    assert!((a.score - sum.tanh()).abs() < 1e-12);

    let off = analyze("Lovely sunny day at the beach");
    assert!(!off.kept_by_filter);
    assert!(off.score > 0.0);

    let json: serde_json::Value = serde_json::from_str(&analyze_tweet("mask").unwrap()).unwrap();
    assert_eq!(json["keywords"][0]["phrase"], "mask");
}

#[test]
fn denoising_demo_reduces_error() {
    let d = denoise_demo(256, 1.0, 3, 7).unwrap();
    assert_eq!(d.clean, demo_signal(256));
    assert_eq!(d.noisy.len(), 256);
    assert!(d.rmse_denoised_vs_clean < d.rmse_noisy_vs_clean);
    assert!(d.threshold > 0.0);
    assert!(denoise_demo(8, 1.0, 3, 7).is_err());
    assert!(denoise_demo(64, -1.0, 3, 7).is_err());
    assert_eq!(denoise_signal(64, 0.5, 2, 1).unwrap(), denoise_signal(64, 0.5, 2, 1).unwrap());
}

#[test]
fn model_comparison() {
    let c = compare(0.05, 0.01, 120, 3, 20).unwrap();
    let names: Vec<&str> = c.models.iter().map(|m| m.name).collect();
    assert_eq!(names, ["lstm", "s-lstm", "arima", "persistence"]);
    assert_eq!(c.dates.len(), 24);
    assert_eq!(c.truth.len(), 24);
    assert_eq!(c.history.len(), 96);
    assert!(c.models.iter().all(|m| m.predicted.len() == 24));
    assert!(c.models.iter().all(|m| (0.0..=1.0).contains(&m.direction_accuracy)));
    assert!(compare(0.05, 0.01, 30, 3, 20).is_err());
    assert!(compare(0.05, 0.01, 120, 3, 0).is_err());
    assert!(compare_models(0.0, 0.01, 80, 1, 5).is_ok());
}
