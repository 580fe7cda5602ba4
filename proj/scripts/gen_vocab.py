#!/usr/bin/env python3
"""Regenerates data/vocab/english.vocab.

The vocabulary drives the greedy longest-match subword tokenizer. Frequent
words carry their leading space (GPT style), so ordinary prose tokenizes to
roughly 4-4.5 characters per token; rare words fall back to suffix pieces and
single characters. One token per line; \\s \\t \\n escapes are honored by the
loader.
"""

import os

WORDS = """
the of and a to in that it is was he for on are as with his they i at be this
have from or one had by word but not what all were we when your can said there
use an each which she do how their if will up other about out many then them
these so some her would make like him into time has look two more write go see
number no way could people my than first water been call who oil its now find
long down day did get come made may part over new sound take only little work
know place year live me back give most very after thing our just name good
sentence man think say great where help through much before line right too mean
old any same tell boy follow came want show also around form three small set
put end does another well large must big even such because turn here why ask
went men read need land different home us move try kind hand picture again
change off play spell air away animal house point page letter mother answer
found study still learn should world high every near add food between own below
country plant last school father keep tree never start city earth eye light
thought head under story saw left don't few while along might close something
seem next hard open example begin life always those both paper together got
group often run important until children side feet car mile night walk white
sea began grow took river four carry state once book hear stop without second
late miss idea enough eat face watch far really almost let above girl sometimes
mountain cut young talk soon list song being leave family body music color
stand sun questions fish area mark dog horse birds problem complete room knew
since ever piece told usually didn't friends easy heard order red door sure
become top ship across today during short better best however low hours black
products happened whole measure remember early waves reached listen wind rock
space covered fast several hold himself toward five step morning passed vowel
true hundred against pattern numeral table north slowly money map farm pulled
draw voice seen cold cried plan notice south sing war ground fall king town
I'll unit figure certain field travel wood fire upon done English road halt
ten fly gave box finally wait correct oh quickly person became shown minutes
strong verb stars front feel fact inches street decided contain course surface
produce building ocean class note nothing rest carefully scientists inside
wheels stay green known island week less machine base ago stood plane system
behind ran round boat game force brought understand warm common bring explain
dry though language shape deep thousands yes clear equation yet government
filled heat full hot check object am rule among noun power cannot able six
size dark ball material special heavy fine pair circle include built can't
matter square syllables perhaps bill felt suddenly test direction center
farmers ready anything divided general energy subject Europe moon region
return believe dance members picked simple cells paint mind love cause rain
exercise eggs train blue wish drop developed window difference distance heart
sit sum summer wall forest probably legs sat main winter wide written length
reason kept interest arms brother race present beautiful store job edge past
sign record finished discovered wild happy beside gone sky glass million west
lay weather root instruments meet third months paragraph raised represent soft
whether clothes flowers shall teacher held describe drive cross speak solve
appear metal son either ice sleep village factors result jumped snow ride care
floor hill pushed baby buy century outside everything tall already instead
phrase soil bed copy free hope spring case laughed nation quite type themselves
temperature bright lead everyone method section lake consonant within dictionary
hair age amount scale pounds although per broken moment tiny possible gold milk
quiet natural lot stone act build middle speed count cat someone sail rolled
bear wonder smiled angle fraction Africa killed melody bottom trip hole poor
let's fight surprise French died beat exactly remain dress iron couldn't
fingers row least catch climbed wrote shouted continued itself else plains gas
England burning design joined foot law ears glad grass you're grew skin valley
cents key president brown trouble cool cloud lost sent symbols wear bad save
experiment engine alone drawing east pay single touch information express mouth
yard equal decimal yourself control practice report straight rise statement
stick party seeds suppose woman coast bank period wire choose clean visit bit
whose received garden please strange caught fell team God certainly guess
horses energy dollars missed business gun doesn't evening broke grandfather
uncle aunt nephew niece cousin sister daughter husband wife lady gentleman
servant master mistress widow orphan child infant youth maiden fellow stranger
neighbour companion friend enemy crowd court judge lawyer clerk doctor nurse
sailor soldier captain colonel major sergeant fisherman shepherd miller baker
butcher tailor smith carpenter mason painter weaver clergyman parson curate
bishop squire tenant landlord steward bailiff beggar thief robber prisoner
debtor creditor partner merchant trader grocer draper chandler innkeeper
coachman groom footman butler housekeeper cook maid charwoman laundress
seamstress governess pupil scholar schoolmaster usher prefect dunce truant
holiday lesson copybook slate ruler cane birch desk bench form dormitory
refectory chapel sermon prayer hymn psalm scripture parish church churchyard
grave tomb funeral mourning wedding christening birthday feast supper dinner
breakfast luncheon tea coffee ale beer wine brandy punch negus toast pudding
pie tart loaf crust cheese bacon beef mutton veal poultry herring oyster
shrimp lobster eel trout salmon bread butter sugar salt pepper mustard vinegar
candle lamp lantern hearth fender poker tongs bellows kettle saucepan trivet
cupboard dresser pantry larder cellar garret attic parlour drawing-room
chamber closet passage staircase landing threshold doorstep knocker bell
shutter casement lattice chimney gable thatch slates tiles porch gate wicket
paling hedge orchard meadow pasture ditch stile lane turnpike highway byway
footpath common heath moor marsh fen dyke millpond weir ford bridge ferry
wharf quay jetty harbour haven lighthouse beacon buoy mast rigging sail anchor
cable helm rudder keel deck cabin berth hold cargo ballast voyage passage
tempest gale squall breeze calm tide ebb flood current channel strait sound
bay cove creek inlet estuary shore strand beach shingle cliff crag headland
promontory island islet reef shoal sandbank seaweed driftwood wreck salvage
smuggler pirate privateer convoy fleet frigate schooner brig sloop cutter
barge wherry skiff punt oar rowlock thwart painter moorings anchorage
Copperfield Peggotty Trotwood Murdstone Steerforth Micawber Creakle Traddles
Barkis Gummidge Heep Wickfield Spenlow Jorkins Dartle Mowcher Omer Joram
Blunderstone Yarmouth Dover Canterbury Salem London Suffolk Norfolk Kent
Australia Switzerland Emily Agnes Dora Clara Betsey Daniel David Ham Jane
Emma Wilkins Edward Annie Sophy Julia Richard Francis Thomas James Charles
Henry George William Robert John Samuel Peter Walter Martha Mary Elizabeth
Margaret Dorothy Janet
""".split()

WORDS += """
mine thine myself himself herself themselves ourselves yourselves itself
oneself somebody anybody nobody everybody someone anyone everyone nothing
anything everything somewhere anywhere everywhere nowhere whatever whoever
whenever wherever however moreover therefore nevertheless meanwhile otherwise
besides although though unless until despite regarding concerning according
reflection remembrance association impression expression profession possession
procession confession occasion occupation situation condition position relation
education imagination examination observation consideration determination
expectation explanation information preparation satisfaction recollection
affection attention intention attraction direction collection connection
objection protection selection description inscription circumstance appearance
importance assistance acquaintance countenance performance remembering
gentleness tenderness willingness happiness unhappiness kindness darkness
weakness illness business madness sadness gladness fondness loneliness
likeness witness fitness forgiveness wilderness consciousness conscience
patience experience influence difference reference presence absence silence
confidence evidence providence residence sentence offence defence pretence
distance instance substance allowance entrance fragrance ignorance
indignation humiliation reconciliation consolation contemplation conversation
observation admiration declaration preparation emigration separation
generation celebration hesitation temptation vexation taxation station
nation creation relation sensation salvation starvation plantation
apartment compartment department employment enjoyment amazement amusement
astonishment arrangement engagement management encouragement establishment
punishment nourishment refreshment settlement movement agreement achievement
improvement announcement commencement development argument instrument
monument moment comment government parliament payment statement treatment
beautiful wonderful dreadful thankful faithful cheerful careful graceful
grateful delightful doubtful fearful forgetful frightful handful hopeful
lawful mindful painful peaceful pitiful plentiful powerful respectful
skilful sorrowful successful thoughtful truthful useful watchful youthful
anxious cautious conscious courteous curious delicious envious furious
generous glorious gracious grievous handsome hideous industrious jealous
luxurious malicious mysterious nervous numerous obvious odious perilous
precious previous prosperous rebellious ridiculous serious spacious
suspicious tedious tremendous various victorious vigorous virtuous
affectionate considerate delicate desolate desperate elaborate fortunate
immediate intimate moderate obstinate passionate private separate ultimate
abandoned accomplished accustomed acquainted admired agitated alarmed
amazed amused appointed approached arrived ashamed assembled assured
attached attended avoided awakened beloved bewildered blessed blushed
bowed breathed buried carried celebrated charmed cherished commanded
composed concealed concerned concluded condemned conducted confessed
confided connected conquered constrained consulted contained contented
contrived convinced corrected crowded crushed cultivated dared darted
dazzled deceived declared delivered departed depended deprived descended
deserted deserved desired despised destined destroyed detained determined
devoted directed disappeared discharged disturbed divided doubted dreaded
dreamed dressed dropped drowned dwelt earned echoed embraced emerged
employed enchanted encountered endeavoured endured engaged entertained
entreated escaped esteemed exchanged exclaimed excused executed exhausted
expired explained expressed extended fancied fastened favoured feared
finished flattered folded forbade forgotten forsaken fulfilled furnished
gathered gazed glanced glittered granted grasped greeted grieved guarded
guided handed happened hastened hesitated honoured hovered hurried
imagined implored inclined increased indulged informed inherited
inquired insisted inspired intended interrupted introduced invited
journeyed kissed knocked laboured lamented landed lingered listened
lodged lowered maintained managed marched married marvelled mentioned
mounted mourned murmured muttered nodded obeyed observed obtained
occupied occurred offered opened ordered paced painted paused perceived
perished permitted persuaded pitied placed pleaded pleased pointed
pondered possessed praised prayed preferred prepared presented preserved
pressed pretended prevailed prevented proceeded produced promised
pronounced proposed protested proved provided pursued quitted reached
recalled received reckoned recognised recovered reflected refused
regarded rejoiced related released relieved remained remarked remembered
removed repeated replied reported reproached requested rescued resembled
resolved respected rested restored resumed retained retired returned
revealed revived rewarded roused rushed satisfied screamed searched
secured seized sentenced served settled shuddered sighed signed
sobbed sought sounded spared sparkled started startled starved stationed
stirred stooped stretched struggled studied submitted succeeded suffered
suggested summoned supplied supported supposed surrendered surrounded
survived suspected sustained swallowed threatened thrust trembled
trusted uttered vanished ventured wandered wearied welcomed whispered
wondered worshipped wounded wrapped yielded
morning evening afternoon midnight noon daybreak twilight dusk dawn
yesterday tomorrow tonight fortnight twelvemonth
pleasant agreeable comfortable miserable terrible horrible sensible
possible impossible probable remarkable respectable valuable venerable
humble noble feeble gentle simple ample
""".split()

SUFFIXES = [
    "ing", "ed", "ly", "es", "s", "er", "est", "tion", "sion", "ment",
    "ness", "ful", "less", "ous", "ive", "able", "ible", "al", "ic",
    "ish", "en", "ry", "ty", "cy", "dom", "ship", "hood", "ward", "wise",
    "'s", "n't", "'ll", "'d", "'re", "'ve", "'m",
]

PREFIX_PIECES = [
    " th", " wh", " sh", " ch", " st", " pr", " tr", " pl", " cl", " cr",
    " br", " gr", " fr", " dr", " sp", " sc", " sk", " sl", " sm", " sn",
    " sw", " tw", " qu", " be", " de", " re", " un", " en", " em", " in",
    " im", " con", " com", " dis", " mis", " pre", " pro", " per", " par",
    " sub", " sur", " over", " under", " out", " up", " down", " fore",
    " a", " b", " c", " d", " e", " f", " g", " h", " i", " j", " k",
    " l", " m", " n", " o", " p", " r", " s", " t", " u", " v", " w",
    " y", " z",
]

MID_PIECES = [
    "th", "he", "in", "er", "an", "re", "on", "at", "en", "nd", "ti",
    "es", "or", "te", "of", "ou", "it", "al", "ar", "st", "to", "nt",
    "ng", "se", "ha", "as", "ro", "io", "le", "ve", "co", "me", "de",
    "hi", "ri", "ro", "ic", "ne", "ea", "ra", "ce", "li", "ch", "ll",
    "be", "ma", "si", "om", "ur",
]


def main() -> None:
    tokens: list[str] = []
    seen: set[str] = set()

    def add(token: str) -> None:
        if token and token not in seen:
            seen.add(token)
            tokens.append(token)

    # single printable characters and whitespace escapes
    for code in range(32, 127):
        ch = chr(code)
        add("\\s" if ch == " " else ch)
    add("\\n")
    add("\\t")

    def word_forms(word: str) -> list[str]:
        forms = [word]
        if word.isalpha() and len(word) >= 3:
            forms.append(word + "s" if not word.endswith("s") else word + "es")
            if word.endswith("e"):
                forms.append(word[:-1] + "ing")
                forms.append(word + "d")
            else:
                forms.append(word + "ing")
                forms.append(word + "ed")
        return forms

    for word in WORDS:
        for base in word_forms(word):
            for form in (base, base.capitalize()):
                add("\\s" + form)  # leading-space form fires inside prose
                add(form)          # bare form fires at line starts
    for suffix in SUFFIXES:
        add(suffix)
    for piece in PREFIX_PIECES:
        add("\\s" + piece[1:])
    for piece in MID_PIECES:
        add(piece)

    out_path = os.path.join(os.path.dirname(__file__), "..", "data", "vocab", "english.vocab")
    with open(out_path, "w", encoding="utf-8") as out:
        out.write("\n".join(tokens) + "\n")
    print(f"wrote {len(tokens)} tokens to {os.path.normpath(out_path)}")


if __name__ == "__main__":
    main()
