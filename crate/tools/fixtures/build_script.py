"""Authoring script for crates/server/fixtures/scenario.script.json."""
import json, sys

TOPIC = "misinformation awareness among older adults"
rules = []


def rule(template, response, **match):
    rules.append({"template": template, "match": match, "response": response})


def bullets(items):
    return "\n".join(f"- {x}" for x in items)


def numbered(items, quote=False):
    return "\n".join(f'{i + 1}. "{x}"' if quote else f"{i + 1}. {x}" for i, x in enumerate(items))


# --- scenario topic -------------------------------------------------------
rule("identify_fields",
     "Here are the relevant fields:\n- Psychology: cognitive psychology\n- Education: adult education\n- Sociology: media sociology",
     research_idea=TOPIC)

EQS = {
    "cognitive psychology": [
        "What cognitive strategies reduce belief in false information?",
        "How does aging affect memory for corrected misinformation?",
        "Why are older adults overconfident in spotting fake news?",
    ],
    "adult education": [
        "How can digital literacy training help older adults detect misinformation?",
        "Which teaching methods improve seniors' evaluation of online sources?",
        "Do intergenerational learning programs build resistance to false news?",
    ],
    "media sociology": [
        "How do social networks spread misinformation among older adults?",
        "Does loneliness increase older adults' exposure to online falsehoods?",
        "How does trust in media differ across generations?",
    ],
}
for field, qs in EQS.items():
    rule("eq_generation", bullets(qs), field=field, research_idea=TOPIC)

# per-EQ expansion: (pseudo answers, term lines, queries[, second batch])
EXPANSIONS = {
    "What cognitive strategies reduce belief in false information?": (
        ["Dual-process accounts: analytic reasoning and cognitive reflection override intuitive acceptance of false headlines.",
         "Inoculation theory: prebunking manipulation techniques builds resistance before exposure.",
         "Metacognition: overconfidence in news judgment undermines careful evaluation.",
         "Automated support: fact-checking tools flag false claims for readers."],
        ["analytic reasoning, cognitive reflection, critical thinking, deliberation",
         "inoculation, prebunking, manipulation techniques",
         "overconfidence, calibration, metacognition",
         "automated fact-checking, claim verification"],
        ["critical thinking training false headlines",
         "cognitive reflection belief false information",
         "analytic reasoning prompts fake news",
         "inoculation prebunking manipulation techniques",
         "overconfidence misinformation susceptibility calibration",
         "critical thinking older adults",
         "inoculation combat misinformation",
         "automated fact-checking claims transformer",
         "cognitive improvement reasoning exercises"],
    ),
    "How does aging affect memory for corrected misinformation?": (
        ["Cognitive aging: source memory decline weakens memory for corrections.",
         "Continued influence effect: retracted misinformation keeps shaping inferences.",
         "Fluency: repetition and familiarity drive the illusory truth effect."],
        ["source memory, cognitive aging, working memory",
         "continued influence effect, retraction, correction",
         "illusory truth effect, repetition, familiarity"],
        ["continued influence effect correction",
         "source memory aging misinformation",
         "illusory truth effect aging",
         "memory retractions older adults",
         "working memory belief updating correction",
         "aging memory corrected misinformation",
         "repetition familiarity truth",
         "misinformation correction memory",
         "retraction misinformation persistence"],
    ),
    "Why are older adults overconfident in spotting fake news?": (
        ["Metacognitive calibration: older adults overestimate their news judgment accuracy.",
         "Inoculation boosters: repeated prebunking counters overconfidence.",
         "Reasoning style: analytic reasoning lowers belief in fake news."],
        ["overconfidence, calibration, metacognition, accuracy",
         "inoculation boosters, prebunking",
         "analytic reasoning, fake news belief"],
        ["overconfidence news judgment older adults",
         "overconfidence calibration intervention",
         "inoculation boosters overconfidence",
         "fake news older adults belief",
         "overconfidence misinformation susceptibility",
         "calibration feedback accuracy",
         "prebunking older adults",
         "analytic reasoning fake news",
         "news consumers overconfidence"],
    ),
    "How can digital literacy training help older adults detect misinformation?": (
        ["Digital literacy pedagogy: hands-on training with smartphones supports misinformation detection.",
         "Community education: library and community courses reach older learners.",
         "Curriculum design: adult education modules on misinformation and online search."],
        ["digital literacy training, smartphone skills, misinformation detection",
         "media literacy education, public libraries, community course",
         "digital literacy curricula, adult education"],
        ["digital literacy training older adults",
         "digital literacy course seniors misinformation",
         "media literacy education older learners",
         "digital literacy curricula adult education",
         "digital literacy workshops misinformation resilience",
         "smartphone skills digital literacy",
         "online misinformation detection training",
         "later life learning digital literacy",
         "community digital literacy course"],
    ),
    "Which teaching methods improve seniors' evaluation of online sources?": (
        ["Civic online reasoning: lateral reading outperforms vertical reading for source evaluation.",
         "Instructional design: worked examples and modeling beat checklists.",
         "Credibility assessment: adult learners judge credibility through guided practice."],
        ["lateral reading, civic online reasoning, source evaluation",
         "worked examples, modeling, checklist approaches",
         "credibility evaluation, guided practice, adult learners"],
        ["lateral reading online sources",
         "civic online reasoning source evaluation",
         "evaluating online sources seniors",
         "checklist lateral reading source evaluation",
         "credibility evaluation online information",
         "teaching lateral reading adult learners",
         "source evaluation instruction methods",
         "teaching methods credibility evaluation",
         "evaluation online sources instruction"],
    ),
    "Do intergenerational learning programs build resistance to false news?": (
        ["Intergenerational pedagogy: reciprocal learning between youth and older adults.",
         "Family learning: grandchildren as digital tutors.",
         "Community programs: intergenerational news literacy in community centers."],
        ["intergenerational learning, reciprocal learning",
         "grandchildren tutors, intergenerational digital learning",
         "news literacy, community centers, program evaluation"],
        ["intergenerational learning false news",
         "intergenerational digital learning fake news",
         "youth mentors older adults news literacy",
         "intergenerational learning program misinformation",
         "grandchildren tutors grandparents",
         "intergenerational approach news literacy",
         "resistance false news",
         "intergenerational learning community centers",
         "intergenerational exchange news"],
    ),
    "How do social networks spread misinformation among older adults?": (
        ["Diffusion studies: misinformation spreads through close ties and family groups.",
         "Network structure: homophily concentrates exposure.",
         "Social influence: trusted peers amplify health rumors."],
        ["misinformation diffusion, close ties, family messaging groups",
         "network homophily, bridging ties",
         "social influence, health rumors, peer correction"],
        ["misinformation spread social networks older adults",
         "family messaging groups misinformation diffusion",
         "social network ties fake news sharing",
         "network homophily misinformation diffusion",
         "social influence health rumors networks",
         "misinformation diffusion retirees",
         "fake news facebook older users",
         "spread misinformation networks",
         "peer correction networks"],
    ),
    "Does loneliness increase older adults' exposure to online falsehoods?": (
        ["Social gerontology: loneliness and social isolation increase time spent online.",
         "Online communities: isolated older adults turn to online communities.",
         "Vulnerability: widowhood and loneliness raise susceptibility to scams."],
        ["loneliness, social isolation, online falsehoods",
         "online communities, misinformation exposure",
         "widowhood, online scams, susceptibility"],
        ["loneliness online falsehoods older adults",
         "social isolation misinformation exposure",
         "loneliness social media belief falsehoods",
         "widowhood loneliness online scams",
         "online communities social isolation",
         "loneliness exposure online falsehoods",
         "isolated older adults online"],
        ["lonely older adults social media",
         "social support susceptibility scams"],
    ),
    "How does trust in media differ across generations?": (
        ["Cohort analysis: generational differences in trust in news media.",
         "Media systems: television news versus social media trust.",
         "Trust decline: declining media trust and news avoidance."],
        ["generational differences, media trust, cohorts",
         "television news, social media trust",
         "declining trust, news avoidance"],
        ["generational differences trust news media",
         "media trust generation misinformation",
         "trust television news social media cohorts",
         "declining trust news media",
         "intergenerational media use",
         "media trust across generations",
         "news avoidance media trust"],
        ["older cohorts television news trust"],
    ),
}

# --- reference topics and questions ---------------------------------------
REFERENCE_TOPICS = {
    "The relationship between mobile phone use and mental well-being": (
        ["Psychology: social psychology", "Medicine: psychiatry", "Sociology: sociology of technology"],
        {
            "social psychology": [
                "How does mobile phone use impact social connectedness and isolation?",
                "Do smartphone interactions influence users' self-esteem and self-worth?",
                "Can excessive mobile phone use contribute to social anxiety or fear of missing out (FOMO)?",
            ],
            "psychiatry": [
                "Is problematic smartphone use associated with depression and anxiety symptoms?",
                "Does night-time phone use disturb sleep and mood?",
                "Can digital detox interventions improve mental health?",
            ],
            "sociology of technology": [
                "How do always-on phones change norms of availability?",
                "Do mobile phones reshape family communication routines?",
                "Who is most excluded when services move to smartphones?",
            ],
        },
    ),
    "Promote sustainable travel choices among urban commuters": (
        ["Economics: transport economics", "Psychology: environmental psychology", "Engineering: transportation engineering"],
        {
            "transport economics": [
                "How do fare subsidies impact urban commuters' adoption of public transport?",
                "What are the economic benefits of reducing car dependency in cities?",
                "How do congestion pricing policies influence commuter behavior and mode choice?",
            ],
            "environmental psychology": [
                "Which habits keep commuters attached to driving?",
                "Do social norms encourage cycling to work?",
                "How does environmental identity shape travel mode choice?",
            ],
            "transportation engineering": [
                "How does bus frequency affect ridership on urban routes?",
                "Do protected bike lanes increase cycling commutes?",
                "Which transit network designs shorten door-to-door travel time?",
            ],
        },
    ),
    "Facilitate community engagement in local environmental conservation efforts": (
        ["Political Science: public policy", "Environmental Science: conservation biology", "Sociology: community sociology"],
        {
            "public policy": [
                "How can policy frameworks enhance public participation in local conservation programs?",
                "What incentives can encourage local communities to engage in conservation efforts?",
                "Which governance structures best support community-led environmental conservation initiatives?",
            ],
            "conservation biology": [
                "Can citizen science improve local biodiversity monitoring?",
                "Which restoration projects benefit most from volunteer labor?",
                "How do protected areas affect nearby communities' attitudes?",
            ],
            "community sociology": [
                "What motivates residents to join neighborhood conservation groups?",
                "How does social capital support collective environmental action?",
                "Do local leaders shape participation in conservation events?",
            ],
        },
    ),
}
for topic, (fields, per_field) in REFERENCE_TOPICS.items():
    rule("identify_fields", bullets(fields), research_idea=topic)
    for field, qs in per_field.items():
        rule("eq_generation", bullets(qs), field=field, research_idea=topic)

REFERENCE_EXPANSIONS = {
    "Does heavy social media use affect code-switching behaviors in multilingual speakers?": (
        "The relationship between social media use and multilingual communication",
        "Linguistics",
        ["Sociolinguistics: social media environments normalize code-switching among multilingual users.",
         "Identity: code-switching serves identity negotiation in online spaces.",
         "Audience design: multilingual speakers tailor language choice to mixed online audiences.",
         "Social capital: strategic code-switching builds online communities."],
        ["code-switching normalization, social media environments, multilingualism, language practices",
         "identity negotiation, social contexts",
         "audience design, digital communication, multilingual audience",
         "social capital, online communities, strategic code-switching"],
        ["social media influence code-switching multilingual",
         "code-switching normalization social media environments",
         "multilingualism social media language practices",
         "identity negotiation code-switching social media",
         "digital communication multilingual audience design",
         "social contexts code-switching social media",
         "social capital code-switching online communities",
         "strategic code-switching social media multilingual",
         "building online communities multilingual code-switching"],
    ),
    "How effective are price incentives in shifting commuter preferences towards sustainable travel methods?": (
        "Promote sustainable travel choices among urban commuters",
        "Economics",
        ["Pricing: discounted fares and subsidies change the cost-benefit balance of commuting.",
         "Behavioral economics: nudges complement price incentives.",
         "Policy evaluation: longitudinal effectiveness depends on infrastructure and public awareness."],
        ["price incentives, discounted fares, subsidies, cost-benefit analysis",
         "behavioral economics, nudges, environmental nudges, behavioral change",
         "longitudinal effectiveness, infrastructure, public awareness, complementary measures"],
        ["Price incentives commuter preferences sustainable travel",
         "Discounted fares impact sustainable commuting",
         "Subsidies cost-benefit analysis commuting",
         "Behavioral economics nudges sustainable commuting",
         "Price incentives behavioral change transportation",
         "Environmental nudges commuting behavior",
         "Longitudinal effectiveness price incentives sustainable transport",
         "Infrastructure public awareness sustainable commuting",
         "Complementary measures price incentives transportation"],
    ),
    "What ethical guidelines should govern the use of robots in elderly care?": (
        "Care robots for aging populations",
        "Philosophy",
        ["Bioethics: patient autonomy and dignity in human-robot interaction.",
         "Information ethics: privacy, data security and surveillance in care settings.",
         "Well-being: companion robots and emotional support for elderly users."],
        ["patient autonomy, dignity, human-robot interaction, ethical design",
         "privacy, data security, surveillance, data ethics",
         "social well-being, companion robots, emotional support, acceptance"],
        ["patient autonomy elderly robot care",
         "dignity human-robot interaction elder care",
         "ethical design robots elder care",
         "privacy elderly care robots",
         "data security ethical concerns elder care",
         "surveillance data ethics elderly",
         "social well-being companion robots elderly",
         "emotional support robots mental health elderly",
         "human-robot interaction elderly acceptance"],
    ),
}

runs = []


def expansion_rules(q, answers, terms, queries, second=None):
    rule("pseudo_answers", bullets(answers), question=q)
    rule("query_terms", numbered(terms), question=q)
    if second is not None:
        rule("search_queries", numbered(second, quote=True), question=q, previous='- "')
    rule("search_queries", numbered(queries, quote=True), question=q)


for q, spec in EXPANSIONS.items():
    expansion_rules(q, *spec)
for q, (topic, disc, answers, terms, queries) in REFERENCE_EXPANSIONS.items():
    expansion_rules(q, answers, terms, queries)
    runs.append({"kind": "expand", "topic": topic, "question": q, "discipline": disc})
for topic in REFERENCE_TOPICS:
    runs.append({"kind": "topic_eqs", "topic": topic, "max_fields": 3})

# --- paper-seeded questions ------------------------------------------------
rule("eq_from_paper",
     "- Medicine: How does health misinformation shape older patients' vaccine decisions?\n"
     "- Psychology: Why do older adults trust health claims shared by peers?\n"
     "- Education: Can health literacy classes reduce seniors' belief in vaccine myths?",
     title="Health misinformation on social media", keywords="older adults")
rule("eq_from_paper",
     "- Medicine: How does exposure to health misinformation affect vaccine hesitancy?\n"
     "- Sociology: Which social media communities circulate vaccine rumors?\n"
     "- Medicine: Can physician communication counter vaccine misinformation?",
     title="Health misinformation on social media", keywords="(none)")
runs.append({"kind": "paper_eqs", "topic": TOPIC, "paper_id": "health-01", "keywords": []})
runs.append({"kind": "paper_eqs", "topic": TOPIC, "paper_id": "health-01", "keywords": ["older adults"]})

# --- curation -----------------------------------------------------------------
rule("cluster_relevance",
     "No. These papers build automated fact-checking systems and do not address older adults or the selected question.",
     papers="fact-checking")
rule("cluster_relevance",
     "Yes. The papers address the selected question for the research topic.")
DIVISIBLE = [("Critical thinking training improves", "Yes. Some papers train critical thinking while others study inoculation or memory for corrections.")]
for needle, answer in DIVISIBLE:
    rule("cluster_divisible", answer, papers=needle)
rule("cluster_divisible", "No. The papers share one focus.")

TITLES = [
    ("Critical thinking training improves", "Critical Thinking and Cognitive Improvement"),
    ("Inoculation against misinformation", "Inoculation and Overconfidence Strategies to Combat Misinformation"),
    ("Overconfidence in news judgment", "Inoculation and Overconfidence Strategies to Combat Misinformation"),
    ("continued influence effect", "Aging, Memory and the Persistence of Corrected Misinformation"),
    ("Digital literacy training helps", "Digital Literacy Training for Older Learners"),
    ("Teaching lateral reading", "Lateral Reading and Source Evaluation Instruction"),
    ("How misinformation spreads", "Misinformation Diffusion in Older Adults' Social Networks"),
    ("Loneliness and exposure", "Loneliness, Isolation and Online Falsehoods"),
    ("Generational differences in trust", "Generational Differences in Media Trust"),
    ("Intergenerational learning programs", "Intergenerational Learning Against False News"),
]
for needle, title in TITLES:
    rule("theme_title", title, papers=needle)

script = {"topic": TOPIC, "max_fields": 6, "rules": rules, "runs": runs}
json.dump(script, open(sys.argv[1], "w"), indent=2, ensure_ascii=False)
print(len(rules), "rules", len(runs), "runs")
