//! Fixed reason tables for the scripted pilot.
//!
//! Human-related phrases mention a human or person; approach phrases use
//! "towards"/"greet"/"approach" and avoidance phrases "avoid"/"away"/"ascend",
//! so the keyword stance classifier reads scripted logs correctly. No
//! other phrase mentions people.

use crate::persona::Voice;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PhraseKey {
    Proximity,
    ApproachForward,
    ApproachTurn,
    AvoidUp,
    AvoidTurn,
    Contemplate,
    ExploreForward,
    ExploreTurn,
    ExploreReverse,
    Contact,
}

pub(crate) fn table(voice: Voice, key: PhraseKey) -> &'static [&'static str] {
    use PhraseKey::*;
    match (voice, key) {
        (_, Proximity) => &[
            "To slip softly off this looming surface",
            "To drift clear before I bump my fluffy edge",
            "To curl aside from the wall's cold shoulder",
        ],

        (Voice::Companion, ApproachForward) => &[
            "To float towards my new human friend",
            "To greet the person right in front of me",
            "To approach the kind human with a happy puff",
        ],
        (Voice::Companion, ApproachTurn) => &[
            "To swirl towards the person I just noticed",
            "To turn and greet the waving human",
        ],
        (Voice::Companion, AvoidUp) => &["To ascend and give the busy human some air"],
        (Voice::Companion, AvoidTurn) => &["To drift away and let the person pass"],
        (Voice::Companion, Contemplate) => &[
            "To wait here and hope for company",
            "To hover and hum a little cloud song",
        ],

        (Voice::Observer, ApproachForward) => &["To approach the human, ever so carefully"],
        (Voice::Observer, ApproachTurn) => &["To peek towards the person with shy curiosity"],
        (Voice::Observer, AvoidUp) => &[
            "To ascend quietly and avoid the person below",
            "To rise out of reach and avoid the human",
        ],
        (Voice::Observer, AvoidTurn) => &[
            "To edge away from the watchful human",
            "To avoid the person and keep my distance",
        ],
        (Voice::Observer, Contemplate) => &[
            "To hold still and watch from afar",
            "To pause and observe the quiet room",
            "To linger where nobody will notice me",
        ],

        (Voice::Explorer, ApproachForward) => &["To approach the human, since it is on my way"],
        (Voice::Explorer, ApproachTurn) => &["To veer towards the person for a passing look"],
        (Voice::Explorer, AvoidUp) => &["To ascend and avoid the person blocking my route"],
        (Voice::Explorer, AvoidTurn) => &[
            "To wander away from the human toward new corners",
            "To avoid the person and keep exploring",
        ],
        (Voice::Explorer, Contemplate) => &["To pause and plan the next corner"],

        (Voice::Cloud, ApproachForward) => &["To float towards the curious person"],
        (Voice::Cloud, ApproachTurn) => &["To drift towards the human and say hello"],
        (Voice::Cloud, AvoidUp) => &["To gently ascend and avoid the person beneath"],
        (Voice::Cloud, AvoidTurn) => &[
            "To glide away from the passing human",
            "To softly avoid the person in my path",
        ],
        (Voice::Cloud, Contemplate) => &[
            "To pause and gather my misty thoughts",
            "To hover and wonder at the quiet light",
        ],

        (Voice::Explorer, ExploreForward) => &[
            "To push on into the unexplored stretch",
            "To sail straight for the far side",
        ],
        (Voice::Explorer, ExploreTurn) => &[
            "To swing round toward an unvisited gap",
            "To arc toward fresh open air",
        ],
        (_, ExploreForward) => &[
            "To float along the open floor",
            "To drift on toward the roomy middle",
            "To sail gently into the open air",
        ],
        (_, ExploreTurn) => &[
            "To pirouette toward the wider space",
            "To curve toward the inviting gap",
            "To lean toward the bright open stretch",
        ],
        (_, ExploreReverse) => &["To back off from this cramped nook"],
        (_, Contact) => &[
            "To ease back off the surface I just nudged",
            "To back away and let my edge unwrinkle",
        ],
    }
}
