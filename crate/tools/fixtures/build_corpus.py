"""Authoring script for crates/server/fixtures/scenario/corpus.json."""
import json, sys

papers = []
citations = {}
references = {}


def add(pid, title, abstract, disciplines, year, venue, authors, cites=0):
    papers.append({
        "paper_id": pid,
        "title": title,
        "abstract": abstract,
        "disciplines": disciplines,
        "year": year,
        "venue": venue,
        "authors": authors,
        "citation_count": cites,
    })


# A. critical thinking and cognitive reflection (Psychology)
A = [
    ("Critical thinking training improves seniors' discernment of false headlines",
     "We tested brief critical thinking training with seniors. Critical thinking training improved analytic reasoning and discernment of false headlines. Critical thinking and analytic reasoning explained the gains."),
    ("Cognitive reflection and critical thinking predict lower belief in false information",
     "Cognitive reflection and critical thinking were measured in adults. Critical thinking and cognitive reflection predicted lower belief in false information. Analytic reasoning is a cognitive strategy that supports critical thinking."),
    ("Analytic reasoning prompts and critical thinking reduce belief in fake news",
     "Analytic reasoning prompts asked readers to use critical thinking. Critical thinking prompts and analytic reasoning reduced belief in fake news among seniors. Critical thinking did not lower belief in true news."),
    ("Training critical thinking skills to counter health misinformation in later life",
     "A critical thinking course trained analytic reasoning in later life. Critical thinking skills and analytic reasoning improved and belief in false health claims declined. Critical thinking gains persisted."),
    ("Cognitive improvement through critical thinking exercises",
     "Critical thinking exercises promoted cognitive improvement in older adults. Cognitive improvement in analytic reasoning and critical thinking strengthened resistance to false information. Critical thinking exercises beat passive reading."),
    ("Deliberation, analytic reasoning and critical thinking before sharing",
     "Deliberation and critical thinking before sharing reduced sharing of false headlines by seniors. Analytic reasoning and critical thinking lowered sharing intentions. Critical thinking prompts improved accuracy."),
]

# B. inoculation, prebunking and overconfidence (Psychology)
B = [
    ("Inoculation against misinformation: prebunking manipulation techniques with older adults",
     "Inoculation theory holds that prebunking builds resistance. Older adults played a prebunking inoculation game about manipulation techniques. Inoculation and prebunking improved recognition of manipulation techniques."),
    ("Overconfidence, inoculation and susceptibility to misinformation",
     "Overconfidence in news judgment predicts susceptibility to misinformation. Inoculation and prebunking reduced overconfidence. Overconfidence was strongest among older adults before inoculation."),
    ("Prebunking videos inoculate older adults against manipulation techniques",
     "Prebunking videos explained manipulation techniques. Inoculation through prebunking videos improved detection of manipulation techniques by older adults. Prebunking inoculation effects were robust."),
    ("Reducing overconfidence with prebunking and inoculation",
     "Overconfidence leaves people vulnerable to misinformation. A prebunking inoculation intervention reduced overconfidence. Lower overconfidence after inoculation and prebunking led to careful evaluation."),
    ("Psychological inoculation and prebunking strategies to combat misinformation",
     "We review psychological inoculation and prebunking strategies to combat misinformation. Inoculation and prebunking work across the lifespan. Technique-based inoculation and prebunking generalize across topics."),
    ("Inoculation boosters, prebunking and overconfidence in older news consumers",
     "Inoculation boosters and repeated prebunking sustained resistance among older news consumers. Overconfidence moderated the inoculation benefit. High overconfidence required more prebunking inoculation boosters."),
]

# C. memory, aging and correction (Psychology)
C = [
    ("Aging and memory for corrections: the continued influence effect",
     "The continued influence effect describes reliance on retracted claims after correction. Aging weakened memory for corrections. Repeated correction improved memory for corrections in aging adults."),
    ("Source memory decline and memory for corrections in aging",
     "Source memory declines with aging. Weaker source memory in aging predicted poorer memory for corrections. Memory for corrections predicted correction uptake."),
    ("Repetition, familiarity and correction memory in aging",
     "Repetition increases familiarity and perceived truth. Aging did not increase the effect when memory for corrections was intact. Correction memory protected aging adults against repeated claims."),
    ("Memory for retractions and corrections over time in aging adults",
     "Retractions and corrections were presented to aging adults. Memory for corrections and retractions faded over one week. Detailed correction produced more durable memory in aging."),
    ("Working memory, aging, and belief updating after correction",
     "Belief updating after correction requires working memory. Aging reduced working memory and slowed updating after correction. Corrections that lowered memory load helped aging adults update beliefs."),
]

# D. digital literacy training (Education)
D = [
    ("Digital literacy training helps older adults detect online misinformation",
     "A digital literacy training program taught older adults to detect online misinformation. After digital literacy training participants more accurately identified false posts. Hands-on practice with smartphones supported learning."),
    ("A community digital literacy course for seniors: effects on misinformation detection",
     "We evaluated a community digital literacy course for seniors. The digital literacy course improved misinformation detection and confidence using online tools. Seniors valued peer support during the digital literacy course."),
    ("Media literacy education for older learners in public libraries",
     "Public libraries offered media literacy education for older learners. Media literacy sessions covered verifying images and checking sources. Older learners improved digital literacy and reported less anxiety about misinformation."),
    ("Designing digital literacy curricula for adult education programs",
     "Adult education programs need digital literacy curricula suited to older learners. We designed digital literacy modules on misinformation, privacy and online search. Teachers in adult education adapted modules to learner needs."),
    ("Online digital literacy workshops improve older adults' misinformation resilience",
     "Online digital literacy workshops were delivered by video call. Older adults who completed the digital literacy workshops showed improved misinformation resilience. Workshop completion was high when sessions were short."),
    ("Smartphone skills and digital literacy in later life learning",
     "Later life learning of smartphone skills supports digital literacy. Digital literacy instruction for older adults included recognizing misinformation in messaging apps. Smartphone skills predicted engagement with fact-checking tools."),
]

# E. source evaluation and lateral reading (Education)
E = [
    ("Teaching lateral reading to evaluate online sources",
     "Lateral reading means leaving a website to check what other sources say about it. Teaching lateral reading improved evaluation of online sources. Students and adult learners adopted lateral reading after short instruction."),
    ("Civic online reasoning: teaching source evaluation to adult learners",
     "Civic online reasoning curricula teach source evaluation. Adult learners practiced evaluating online sources using lateral reading. Source evaluation skills improved compared with a control group."),
    ("Evaluating online sources: instruction methods for seniors",
     "Instruction methods for evaluating online sources were compared with seniors. Worked examples of source evaluation outperformed checklists. Seniors applied lateral reading when evaluating online sources about health."),
    ("Checklist versus lateral reading approaches to source evaluation instruction",
     "Checklist approaches to source evaluation were compared with lateral reading. Lateral reading instruction produced better evaluation of online sources. Checklists led to overtrust in professional-looking websites."),
    ("Teaching methods for credibility evaluation of online information in adult education",
     "Teaching methods for credibility evaluation of online information were tested in adult education classes. Modeling lateral reading and source evaluation improved credibility judgments. Adult learners preferred guided practice."),
]

# F. intergenerational learning (Education)
F = [
    ("Intergenerational learning programs to build resistance to false news",
     "Intergenerational learning programs paired students with older adults. Intergenerational learning sessions on false news built resistance to false news for both generations. Older participants valued the intergenerational exchange."),
    ("Grandchildren as tutors: intergenerational digital learning and fake news",
     "Grandchildren tutored grandparents in digital skills. Intergenerational digital learning improved detection of fake news among grandparents. Intergenerational learning strengthened family communication about news."),
    ("Youth mentors and older adults: an intergenerational approach to news literacy",
     "Youth mentors delivered news literacy sessions to older adults. The intergenerational approach to news literacy increased resistance to false news. Mentors also gained communication skills."),
    ("Evaluating an intergenerational learning program on misinformation in community centers",
     "Community centers hosted an intergenerational learning program on misinformation. The intergenerational learning program improved misinformation awareness in older adults and youth. Program fidelity predicted outcomes."),
]

# G. social networks and diffusion (Sociology)
G = [
    ("How misinformation spreads through older adults' social networks",
     "We traced how misinformation spreads through social networks of older adults. Close ties and family groups amplified the spread of misinformation. Older adults shared misinformation mostly within tight social networks."),
    ("Family messaging groups and the diffusion of misinformation",
     "Family messaging groups are a key channel for the diffusion of misinformation. Older adults forwarded misinformation in family messaging groups more than younger relatives. Social network structure shaped diffusion."),
    ("Social network ties and sharing of fake news on Facebook by older users",
     "Older users shared more fake news on Facebook than younger users. Social network ties to partisan pages predicted sharing of fake news. Older users with dense social networks were exposed to more fake news."),
    ("Network homophily and misinformation diffusion among retirees",
     "Network homophily among retirees concentrated exposure to misinformation. Misinformation diffusion followed homophilous social networks. Bridging ties reduced misinformation diffusion."),
    ("Social influence in older adults' networks and the spread of health rumors",
     "Social influence in older adults' networks drove the spread of health rumors. Misinformation spread faster through trusted social networks. Peer correction inside networks slowed the spread."),
]

# H. loneliness and isolation (Sociology)
H = [
    ("Loneliness and exposure to online falsehoods in older adults",
     "Loneliness may increase exposure to online falsehoods. Lonely older adults spent more time online and encountered more online falsehoods. Social isolation predicted reliance on unverified online sources."),
    ("Social isolation, online communities and misinformation exposure in later life",
     "Social isolation pushes older adults toward online communities. Isolated older adults in online communities reported more misinformation exposure. Loneliness moderated trust in community members."),
    ("Loneliness, social media use and belief in online falsehoods",
     "Loneliness was associated with heavier social media use. Lonely older adults were more likely to believe online falsehoods. Social connection buffered the link between loneliness and belief."),
    ("Widowhood, loneliness and susceptibility to online scams and falsehoods",
     "Widowhood increases loneliness among older adults. Loneliness after widowhood predicted susceptibility to online scams and online falsehoods. Social support reduced susceptibility."),
]

# I. trust in media across generations (Sociology)
I = [
    ("Generational differences in trust in news media",
     "Trust in news media differs across generations. Older generations expressed higher trust in television news and lower trust in social media. Generational differences in media trust shaped misinformation exposure."),
    ("Media trust, generation and acceptance of misinformation",
     "Media trust varies by generation. Older adults with low media trust accepted more misinformation from alternative sources. Generation and media trust jointly predicted misinformation acceptance."),
    ("Trust in television news and social media across age cohorts",
     "We compared trust in television news and social media across age cohorts. Older cohorts trusted television news more than social media. Media trust across generations declined after major scandals."),
    ("Declining trust in news media and intergenerational media use",
     "Declining trust in news media affects all generations. Intergenerational media use patterns show older adults relying on television news. Media trust predicted news avoidance across generations."),
]

# J. distractor: automated fact-checking systems (Computer Science)
J = [
    ("Automated fact-checking with transformer models",
     "We present automated fact-checking with transformer models. The fact-checking model retrieves evidence and verifies claims. Transformer models improve claim verification benchmarks."),
    ("A benchmark dataset for automated claim verification",
     "A benchmark dataset for automated claim verification is introduced. Claims are paired with evidence documents for fact-checking models. Baseline transformer models are evaluated."),
    ("Neural fake news detection from linguistic features",
     "Neural fake news detection uses linguistic features and transformer models. Detection accuracy improves with stylistic features. Automated fake news detection remains brittle under domain shift."),
    ("Explainable automated fact-checking for social media claims",
     "Explainable automated fact-checking generates justifications for verdicts on social media claims. Transformer models produce evidence-based explanations for fact-checking."),
]

groups = [
    ("crit", A, ["Psychology"], "Psychological Science"),
    ("inoc", B, ["Psychology"], "Journal of Experimental Psychology: Applied"),
    ("mem", C, ["Psychology"], "Psychology and Aging"),
    ("dlit", D, ["Education"], "Educational Gerontology"),
    ("src", E, ["Education"], "Computers & Education"),
    ("igen", F, ["Education", "Sociology"], "Journal of Intergenerational Relationships"),
    ("net", G, ["Sociology"], "Social Networks"),
    ("lone", H, ["Sociology"], "The Gerontologist"),
    ("trust", I, ["Sociology"], "Journalism & Mass Communication Quarterly"),
    ("fc", J, ["Computer Science"], "Proceedings of ACL"),
]

authors_pool = [
    "A. Moreno", "B. Lindqvist", "C. Okafor", "D. Tanaka", "E. Novak", "F. Haddad",
    "G. Ribeiro", "H. Schmidt", "I. Petrov", "J. Kim", "K. Mensah", "L. Rossi",
]

for gi, (prefix, items, disc, venue) in enumerate(groups):
    for i, (title, abstract) in enumerate(items):
        pid = f"{prefix}-{i + 1:02d}"
        year = 2016 + (gi + i) % 8
        authors = [authors_pool[(gi * 3 + i) % 12], authors_pool[(gi * 5 + i + 1) % 12]]
        add(pid, title, abstract, disc, year, venue, authors, cites=10 * (gi + 1) + i)

# noise: single papers loosely related
add("misc-01", "Retirement and volunteering in rural communities",
    "Retirement often leads to volunteering in rural communities. Volunteering improved well-being of retirees.",
    ["Sociology"], 2018, "Ageing & Society", ["M. Ortiz"], 12)
add("misc-02", "Hearing loss and television viewing habits",
    "Hearing loss changes television viewing habits in later life. Captions increased viewing time.",
    ["Medicine"], 2019, "Ear and Hearing", ["N. Yilmaz"], 8)
add("misc-03", "Political polarization and news avoidance",
    "Political polarization is linked to news avoidance. Avoiders reported lower political knowledge and lower trust.",
    ["Political Science"], 2021, "Political Communication", ["O. Berg"], 33)
add("misc-04", "Curiosity and the pleasure of learning new skills in retirement",
    "Curiosity supports the pleasure of learning new skills in retirement. Learners described intrinsic motivation.",
    ["Psychology"], 2017, "Motivation and Emotion", ["P. Dubois"], 5)
add("misc-05", "Radio talk shows and rumor circulation",
    "Radio talk shows contribute to rumor circulation in small towns. Call-in formats spread unverified claims.",
    ["Sociology"], 2015, "Media, Culture & Society", [], 3)

# health misinformation seed paper for paper-seeded questions
add("health-01", "Health misinformation on social media and vaccine hesitancy among older patients",
    "Health misinformation on social media is linked to vaccine hesitancy. Older patients exposed to health misinformation reported lower vaccine intentions. Trust in physicians reduced the association. We discuss clinical communication strategies.",
    ["Medicine", "Sociology"], 2022, "Vaccine", ["Q. Adeyemi", "R. Watanabe"], 140)

# citation set for link ranking: papers citing health-01
cite_set = [
    ("cit-01", "Physician communication and correction of vaccine myths", "Physician communication corrected vaccine myths among patients.", ["Medicine"], 2023),
    ("cit-02", "Vaccine hesitancy in primary care: a clinical review", "A clinical review of vaccine hesitancy in primary care settings.", ["Medicine"], 2023),
    ("cit-03", "Health literacy and misinformation susceptibility in older patients", "Low health literacy predicted misinformation susceptibility in older patients.", ["Medicine", "Psychology"], 2023),
    ("cit-04", "Cognitive biases in evaluating health claims", "Cognitive biases shape how people evaluate health claims online.", ["Psychology"], 2024),
    ("cit-05", "Anxiety and information seeking during a pandemic", "Anxiety increased information seeking and exposure to rumors during a pandemic.", ["Psychology"], 2022),
    ("cit-06", "Community health workers countering rumors in rural areas", "Community health workers countered rumors through trusted local networks.", ["Sociology"], 2023),
    ("cit-07", "Religious leaders and vaccine acceptance", "Religious leaders influenced vaccine acceptance in their congregations.", ["Sociology"], 2024),
    ("cit-08", "Classifying vaccine misinformation tweets with language models", "Language models classified vaccine misinformation tweets with high accuracy.", ["Computer Science"], 2023),
    ("cit-09", "Patient education videos about vaccines for seniors", "Patient education videos improved vaccine knowledge among seniors.", ["Education", "Medicine"], 2024),
    ("cit-10", "An untagged preprint on vaccine rumors", "Rumors about vaccines circulated widely in messaging apps.", [], 2024),
]
for pid, title, abstract, disc, year in cite_set:
    add(pid, title, abstract, disc, year, None, ["S. Laine"], 0)
citations["health-01"] = [c[0] for c in cite_set]
references["health-01"] = ["net-05", "lone-01", "trust-02"]
citations["crit-01"] = ["crit-02", "inoc-02", "dlit-01"]
references["crit-02"] = ["crit-01"]

json.dump({"papers": papers, "citations": citations, "references": references},
          open(sys.argv[1], "w"), indent=2, ensure_ascii=False)
print(len(papers), "papers")
