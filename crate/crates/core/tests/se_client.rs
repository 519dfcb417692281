use std::cell::Cell;
use std::collections::VecDeque;
use std::path::Path;
use std::rc::Rc;
use std::time::Duration;

use chrono::{TimeZone, Utc};
use so_insight::ingest::{parse_jsonl, write_jsonl, PostType};
use so_insight::se_client::{
    Client, Clock, FetchError, FetchSpec, HttpResponse, Transport, MAX_RETRIES,
};

fn fixture(name: &str) -> Vec<u8> {
    std::fs::read(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/fixtures/se_api")
            .join(name),
    )
    .unwrap()
}

/// Serves canned responses in order and records every URL requested.
struct Scripted {
    responses: VecDeque<HttpResponse>,
    urls: Vec<String>,
}

impl Scripted {
    fn new(responses: Vec<(u16, Vec<u8>)>) -> Self {
        Scripted {
            responses: responses
                .into_iter()
                .map(|(status, body)| HttpResponse { status, body })
                .collect(),
            urls: Vec::new(),
        }
    }
}

impl Transport for Scripted {
    fn get(&mut self, url: &str) -> Result<HttpResponse, String> {
        self.urls.push(url.to_string());
        self.responses
            .pop_front()
            .ok_or_else(|| "no more scripted responses".to_string())
    }
}

#[derive(Clone, Default)]
struct FakeClock {
    now: Rc<Cell<Duration>>,
    slept: Rc<Cell<Duration>>,
}

impl Clock for FakeClock {
    fn now(&self) -> Duration {
        self.now.get()
    }

    fn sleep(&mut self, d: Duration) {
        self.now.set(self.now.get() + d);
        self.slept.set(self.slept.get() + d);
    }
}

fn spec(page_size: usize, max_pages: Option<usize>) -> FetchSpec {
    FetchSpec {
        site: "stackoverflow".into(),
        tag: "android".into(),
        from_date: Utc.with_ymd_and_hms(2009, 1, 1, 0, 0, 0).unwrap(),
        to_date: Utc.with_ymd_and_hms(2022, 4, 30, 0, 0, 0).unwrap(),
        page_size,
        api_key: None,
        max_pages,
    }
}

#[test]
fn one_page_of_two_questions() {
    let mut client = Client::new(
        Scripted::new(vec![(200, fixture("questions_page1.json"))]),
        FakeClock::default(),
        None,
    );
    let posts: Vec<_> = client
        .fetch_questions(&spec(2, Some(1)))
        .unwrap()
        .collect::<Result<_, _>>()
        .unwrap();
    assert_eq!(posts.len(), 2);
    assert_eq!(posts.iter().map(|p| p.id).collect::<Vec<_>>(), vec![7, 9]);
    assert!(posts.iter().all(|p| p.post_type == PostType::Question));
    assert_eq!(posts[0].tags, vec!["android", "gradle", "jenkins"]);
    assert_eq!(posts[1].score, -1);
    assert_eq!(client.progress().quota_remaining, Some(9998));
    let url = &client.transport().urls[0];
    for part in [
        "/2.3/questions?",
        "site=stackoverflow",
        "tagged=android",
        "fromdate=1230768000",
        "todate=1651276800",
        "pagesize=2",
        "filter=withbody",
        "page=1",
    ] {
        assert!(url.contains(part), "{url} lacks {part}");
    }
}

#[test]
fn follows_has_more_and_honors_backoff() {
    let transport = Scripted::new(vec![
        (200, fixture("questions_page1.json")),
        (200, fixture("questions_page2_backoff.json")),
        (200, fixture("questions_page3.json")),
    ]);
    let clock = FakeClock::default();
    let mut client = Client::new(transport, clock.clone(), None);
    let ids: Vec<u64> = client
        .fetch_questions(&spec(2, None))
        .unwrap()
        .map(|p| p.unwrap().id)
        .collect();
    assert_eq!(ids, vec![7, 9, 12, 14]);
    assert_eq!(client.retries(), 1);
    assert_eq!(clock.slept.get(), Duration::from_secs(10));
    let log = client.request_log();
    assert_eq!(log.len(), 3);
    assert!(log[2].0 >= log[1].0 + Duration::from_secs(10));
    assert!(log[2].1.ends_with("page=3"));
    assert_eq!(client.progress().page, 3);
    assert_eq!(client.progress().items, 4);
}

#[test]
fn throttled_request_retries_after_advertised_wait() {
    let transport = Scripted::new(vec![
        (429, fixture("throttled.json")),
        (200, fixture("questions_page3.json")),
    ]);
    let clock = FakeClock::default();
    let mut client = Client::new(transport, clock.clone(), None);
    let posts: Vec<_> = client
        .fetch_questions(&spec(2, None))
        .unwrap()
        .collect::<Result<_, _>>()
        .unwrap();
    assert_eq!(posts.len(), 1);
    assert_eq!(client.retries(), 1);
    assert_eq!(clock.slept.get(), Duration::from_secs(3));
    let log = client.request_log();
    assert_eq!(log[0].1, log[1].1);
    assert!(log[1].0 >= log[0].0 + Duration::from_secs(3));
}

#[test]
fn gives_up_after_max_retries() {
    let responses = (0..=MAX_RETRIES)
        .map(|_| (429, fixture("throttled.json")))
        .collect();
    let mut client = Client::new(Scripted::new(responses), FakeClock::default(), None);
    let results: Vec<_> = client.fetch_questions(&spec(2, None)).unwrap().collect();
    assert_eq!(results.len(), 1);
    assert!(matches!(
        results[0],
        Err(FetchError::Quota {
            retries: MAX_RETRIES
        })
    ));
    assert_eq!(client.request_log().len(), MAX_RETRIES + 1);
}

#[test]
fn answers_carry_parent_and_accepted() {
    let mut client = Client::new(
        Scripted::new(vec![(200, fixture("answers_q7.json"))]),
        FakeClock::default(),
        None,
    );
    let posts: Vec<_> = client
        .fetch_answers(&[7], &spec(100, None))
        .unwrap()
        .collect::<Result<_, _>>()
        .unwrap();
    assert_eq!(posts.len(), 2);
    assert!(posts
        .iter()
        .all(|p| p.parent_id == Some(7) && p.post_type == PostType::Answer));
    assert_eq!(
        posts.iter().map(|p| p.accepted).collect::<Vec<_>>(),
        vec![true, false]
    );
    assert!(client.transport().urls[0].contains("/questions/7/answers?"));
}

#[test]
fn answer_ids_batched_by_hundred() {
    let empty =
        br#"{"items":[],"has_more":false,"quota_max":10000,"quota_remaining":9000}"#.to_vec();
    let mut client = Client::new(
        Scripted::new(vec![
            (200, empty.clone()),
            (200, empty.clone()),
            (200, empty),
        ]),
        FakeClock::default(),
        None,
    );
    let ids: Vec<u64> = (1..=250).collect();
    assert_eq!(
        client
            .fetch_answers(&ids, &spec(100, None))
            .unwrap()
            .count(),
        0
    );
    let urls = &client.transport().urls;
    assert_eq!(urls.len(), 3);
    assert!(urls[0].contains("/questions/1;2;"));
    assert!(urls[2].contains("/questions/201;"));
    assert!(urls[2].contains(";250/answers"));
}

#[test]
fn invalid_requests_rejected() {
    let mut client = Client::new(Scripted::new(vec![]), FakeClock::default(), None);
    assert!(matches!(
        client.fetch_answers(&[], &spec(10, None)),
        Err(FetchError::InvalidSpec(_))
    ));
    let mut bad = spec(10, None);
    bad.from_date = bad.to_date;
    assert!(matches!(
        client.fetch_questions(&bad),
        Err(FetchError::InvalidSpec(_))
    ));
    assert!(client.request_log().is_empty());
}

#[test]
fn malformed_item_names_page() {
    let mut client = Client::new(
        Scripted::new(vec![(200, fixture("malformed_item.json"))]),
        FakeClock::default(),
        None,
    );
    let results: Vec<_> = client.fetch_questions(&spec(10, None)).unwrap().collect();
    match &results[0] {
        Err(FetchError::Malformed { page: 1, message }) => assert!(message.contains("score")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn cache_replays_without_network() {
    let dir = tempfile::tempdir().unwrap();
    let mut first = Client::new(
        Scripted::new(vec![(200, fixture("answers_q7.json"))]),
        FakeClock::default(),
        Some(dir.path().to_path_buf()),
    );
    let a: Vec<_> = first
        .fetch_answers(&[7], &spec(100, None))
        .unwrap()
        .map(Result::unwrap)
        .collect();
    let mut keyed = spec(100, None);
    keyed.api_key = Some("k".into());
    let mut second = Client::new(
        Scripted::new(vec![]),
        FakeClock::default(),
        Some(dir.path().to_path_buf()),
    );
    let b: Vec<_> = second
        .fetch_answers(&[7], &keyed)
        .unwrap()
        .map(Result::unwrap)
        .collect();
    assert_eq!(a, b);
    assert!(second.request_log().is_empty());
}

#[test]
fn fetched_posts_round_trip_through_ingest() {
    let mut client = Client::new(
        Scripted::new(vec![
            (200, fixture("questions_page3.json")),
            (200, fixture("answers_q7.json")),
        ]),
        FakeClock::default(),
        None,
    );
    let mut posts: Vec<_> = client
        .fetch_questions(&spec(2, None))
        .unwrap()
        .map(Result::unwrap)
        .collect();
    posts.extend(
        client
            .fetch_answers(&[7], &spec(2, None))
            .unwrap()
            .map(Result::unwrap),
    );
    let mut buf = Vec::new();
    write_jsonl(&mut buf, &posts).unwrap();
    assert_eq!(parse_jsonl(&buf[..]).unwrap(), posts);
}
